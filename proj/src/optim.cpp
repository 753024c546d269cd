#include "hlens/optim.hpp"

#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"

#include <cmath>

namespace hlens {

namespace {

void check_shapes(const OptimizerSpec& spec, const ParamVector& theta, const ParamVector& grad) {
  if (theta.size() != grad.size())
    raise(Err::ShapeError, "gradient shape does not match parameters");
  for (double g : grad)
    if (!std::isfinite(g)) raise(Err::NonFiniteGradient, "non-finite gradient entry");
  spec.validate();
}

double lr_at(const OptimizerSpec& spec, long t) {
  if (spec.schedule == LrSchedule::constant) return spec.lr;
  // Linear decay over total_steps; stays positive for t < total_steps.
  const double frac = static_cast<double>(t) / static_cast<double>(spec.total_steps);
  return spec.lr * (1.0 - frac);
}

} // namespace

OptimizerSpec OptimizerSpec::defaults(OptKind kind) {
  OptimizerSpec s;
  s.kind = kind;
  switch (kind) {
  case OptKind::sgd:
    s.lr = 0.1;
    s.beta1 = 0.9;
    break;
  case OptKind::adam:
    s.lr = 0.001;
    s.beta1 = 0.9;
    s.beta2 = 0.999;
    break;
  case OptKind::lion:
  case OptKind::tanh_lion:
    s.lr = 0.001;
    s.beta1 = 0.9;
    s.beta2 = 0.99;
    break;
  }
  return s;
}

void OptimizerSpec::validate() const {
  if (!(lr > 0.0)) raise(Err::InvalidConfig, "learning rate must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0) raise(Err::InvalidConfig, "beta1 must be in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) raise(Err::InvalidConfig, "beta2 must be in [0, 1)");
  if (kind == OptKind::tanh_lion && tau_mode == TauMode::fixed && !(tau > 0.0))
    raise(Err::InvalidTemperature, "tau must be > 0");
  if (schedule == LrSchedule::linear && total_steps <= 0)
    raise(Err::InvalidConfig, "linear schedule needs total_steps > 0");
}

OptKind opt_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptKind::sgd;
  if (s == "adam") return OptKind::adam;
  if (s == "lion") return OptKind::lion;
  if (s == "tanh_lion") return OptKind::tanh_lion;
  raise(Err::InvalidKind, "unknown optimizer kind '" + s + "'");
}

std::string to_string(OptKind k) {
  switch (k) {
  case OptKind::sgd: return "sgd";
  case OptKind::adam: return "adam";
  case OptKind::lion: return "lion";
  case OptKind::tanh_lion: return "tanh_lion";
  }
  return "?";
}

double auto_temperature(std::span<const double> u) {
  if (u.size() < 2) raise(Err::InsufficientData, "auto temperature needs >= 2 coordinates");
  const double n = static_cast<double>(u.size());
  const double mean_abs = kernels::abs_sum(u) / n;
  double var = 0.0;
  for (double v : u) {
    const double d = std::fabs(v) - mean_abs;
    var += d * d;
  }
  var /= n;
  const double tau = mean_abs / (var + 1e-12);
  return std::min(1e6, std::max(1e-6, tau));
}

void sgd_step(const OptimizerSpec& spec, long /*t*/, ParamVector& m, ParamVector& theta,
              const ParamVector& grad) {
  check_shapes(spec, theta, grad);
  // Heavy ball: m' = beta*m + g; theta' = theta - eta*m'.
  kernels::scale_add(spec.beta1, m, grad);
  kernels::axpy(-spec.lr, m, theta);
}

void adam_step(const OptimizerSpec& spec, long t, ParamVector& m, ParamVector& v,
               ParamVector& theta, const ParamVector& grad) {
  check_shapes(spec, theta, grad);
  kernels::lerp(spec.beta1, m, grad);
  kernels::sq_lerp(spec.beta2, v, grad);
  const double c1 = 1.0 / (1.0 - std::pow(spec.beta1, static_cast<double>(t + 1)));
  const double c2 = 1.0 / (1.0 - std::pow(spec.beta2, static_cast<double>(t + 1)));
  kernels::adam_update(spec.lr, c1, c2, spec.epsilon, m, v, theta);
}

void lion_step(const OptimizerSpec& spec, long /*t*/, ParamVector& m, ParamVector& u,
               ParamVector& theta, const ParamVector& grad) {
  check_shapes(spec, theta, grad);
  // U = beta2*m + (1-beta2)*g; theta -= eta*sign(U); m = beta1*m + (1-beta1)*g.
  kernels::lerp_to(spec.beta2, m, grad, u);
  kernels::sign_update(spec.lr, u, theta);
  kernels::lerp(spec.beta1, m, grad);
}

void tanh_lion_step(const OptimizerSpec& spec, long /*t*/, ParamVector& m, ParamVector& u,
                    ParamVector& theta, const ParamVector& grad) {
  check_shapes(spec, theta, grad);
  kernels::lerp_to(spec.beta2, m, grad, u);
  const double tau = (spec.tau_mode == TauMode::automatic) ? auto_temperature(u) : spec.tau;
  if (!(tau > 0.0)) raise(Err::InvalidTemperature, "tau must be > 0");
  // theta -= eta*tanh(tau*U); tanh stays on scalar libm by contract.
  const double eta = spec.lr;
  for (std::size_t i = 0; i < theta.size(); ++i)
    theta[i] -= eta * std::tanh(tau * u[i]);
  kernels::lerp(spec.beta1, m, grad);
}

Optimizer::Optimizer(OptimizerSpec spec, std::size_t dim) : spec_(spec) {
  spec_.validate();
  m_.assign(dim, 0.0);
  if (spec_.kind == OptKind::adam) v_.assign(dim, 0.0);
  if (spec_.kind == OptKind::lion || spec_.kind == OptKind::tanh_lion) u_.assign(dim, 0.0);
}

double Optimizer::current_lr() const { return lr_at(spec_, t_); }

void Optimizer::step(ParamVector& theta, const ParamVector& grad) {
  if (theta.size() != m_.size()) raise(Err::ShapeError, "parameter shape does not match state");
  OptimizerSpec step_spec = spec_;
  step_spec.lr = lr_at(spec_, t_);
  switch (spec_.kind) {
  case OptKind::sgd: sgd_step(step_spec, t_, m_, theta, grad); break;
  case OptKind::adam: adam_step(step_spec, t_, m_, v_, theta, grad); break;
  case OptKind::lion: lion_step(step_spec, t_, m_, u_, theta, grad); break;
  case OptKind::tanh_lion: tanh_lion_step(step_spec, t_, m_, u_, theta, grad); break;
  }
  ++t_;
}

} // namespace hlens
