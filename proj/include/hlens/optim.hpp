#ifndef HLENS_OPTIM_HPP
#define HLENS_OPTIM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hlens {

using ParamVector = std::vector<double>;

enum class OptKind { sgd, adam, lion, tanh_lion };
enum class TauMode { fixed, automatic };
enum class LrSchedule { constant, linear };

struct OptimizerSpec {
  OptKind kind = OptKind::sgd;
  double lr = 0.01;
  double beta1 = 0.9;  // momentum for sgd/adam/lion
  double beta2 = 0.99; // interpolation (lion) / second moment (adam: 0.999)
  double epsilon = 1e-8;
  TauMode tau_mode = TauMode::fixed;
  double tau = 10.0;
  LrSchedule schedule = LrSchedule::constant;
  long total_steps = 0; // required for the linear schedule

  static OptimizerSpec defaults(OptKind kind);
  void validate() const;
};

OptKind opt_kind_from_string(const std::string& s);
std::string to_string(OptKind k);

/// Plug-in estimate of mu/sigma^2 from the |U| coordinates:
/// mean(|u|) / (var(|u|) + 1e-12), clamped to [1e-6, 1e6].
double auto_temperature(std::span<const double> u);

/// One optimizer with its state buffers. step() is a deterministic
/// transition (state, theta, grad) -> (state', theta'); no hidden inputs.
class Optimizer {
public:
  Optimizer(OptimizerSpec spec, std::size_t dim);

  void step(ParamVector& theta, const ParamVector& grad);

  long step_count() const { return t_; }
  const OptimizerSpec& spec() const { return spec_; }
  const ParamVector& momentum() const { return m_; }
  const ParamVector& second_moment() const { return v_; }
  /// Learning rate that the next step will use.
  double current_lr() const;

private:
  OptimizerSpec spec_;
  long t_ = 0;
  ParamVector m_;
  ParamVector v_; // adam only
  ParamVector u_; // interpolated direction scratch (lion family)
};

// Single-step forms mirroring the optimizer definitions one to one.
void sgd_step(const OptimizerSpec&, long t, ParamVector& m, ParamVector& theta,
              const ParamVector& grad);
void adam_step(const OptimizerSpec&, long t, ParamVector& m, ParamVector& v, ParamVector& theta,
               const ParamVector& grad);
void lion_step(const OptimizerSpec&, long t, ParamVector& m, ParamVector& u, ParamVector& theta,
               const ParamVector& grad);
void tanh_lion_step(const OptimizerSpec&, long t, ParamVector& m, ParamVector& u,
                    ParamVector& theta, const ParamVector& grad);

} // namespace hlens

#endif
