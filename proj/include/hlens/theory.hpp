#ifndef HLENS_THEORY_HPP
#define HLENS_THEORY_HPP

#include "hlens/symmat.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hlens {

/// Multivariate Gaussian N(mean, covariance), covariance positive definite.
struct GaussianSpec {
  std::vector<double> mean;
  SymMatrix covariance;
};

/// Binary observation model: Y uniform on {+1,-1},
/// X | Y=y ~ N(y*mu, sigma^2).
struct GaussianSignChannel {
  double mu = 1.0;
  double sigma = 1.0;
};

struct PacBayesInputs {
  SymMatrix H;                    // d x d, positive definite
  double sigma2 = 1.0;            // prior variance
  std::vector<double> theta_star; // local minimizer
  long n = 1;                     // sample count
  double delta = 0.05;            // confidence, in (0, 1]
  double mu_min = 0.0;            // eigenvalue floor, mu_min I <= H
};

struct PacBayesBound {
  double bound = 0.0;       // printed right-hand side
  double exact_bound = 0.0; // sqrt((KL(Q||P) + ln(1/delta)) / (2n))
  double radicand = 0.0;
  double term_delta = 0.0;   // ln(1/delta)
  double term_dim = 0.0;     // d ln((sigma^2 + mu)/d)
  double term_norm = 0.0;    // ||theta*||^2 / sigma^2
  double term_entropy = 0.0; // d (ln tr H + gap - gap^2/d)
  double entropy_gap = 0.0;  // ln d - H(H)
  double kl_exact = 0.0;
};

/// Standard normal CDF via erfc; absolute error well below 1e-12.
double normal_cdf(double z);

/// -e ln e - (1-e) ln(1-e), 0 at the endpoints.
double binary_entropy(double eps);

/// Gaussian Laplace approximation: N(theta*, (H + I/sigma^2)^-1), the
/// covariance built spectrally.
GaussianSpec laplace_posterior(const SymMatrix& H, double sigma2,
                               std::span<const double> theta_star);

/// KL(Q || P) between Gaussians, in nats.
double gaussian_kl(const GaussianSpec& Q, const GaussianSpec& P);

/// The information-theoretic PAC-Bayes bound, evaluated verbatim, together
/// with the exact KL-based bound for comparison. A negative radicand raises
/// Error(BoundUndefined) with the per-term breakdown.
PacBayesBound pac_bayes_bound(const PacBayesInputs& inputs);

/// sign rule with +1 at x = 0.
int bayes_classifier(const GaussianSignChannel& ch, double x);

/// Error rate of the sign rule: Phi(-mu/sigma); 0.5 exactly iff mu = 0.
double bayes_error(const GaussianSignChannel& ch);

/// P(Y=+1 | X=x) = 1 / (1 + exp(-2 mu x / sigma^2)).
double posterior_positive(const GaussianSignChannel& ch, double x);

/// E[Y | X=x] = tanh(mu x / sigma^2).
double posterior_mean(const GaussianSignChannel& ch, double x);

struct FanoReport {
  double epsilon_hat = 0.0;
  double cond_entropy_hat = 0.0; // H(Y | f(X)) from the empirical joint
  double binary_entropy_of_eps = 0.0;
  double slack = 0.0; // 3x propagated sampling error + plug-in bias guard
  bool holds = false; // cond_entropy_hat <= H_b(eps_hat) + slack
  long samples = 0;
};

/// Seeded simulation of (X, Y); checks Fano's inequality for the given rule.
FanoReport empirical_error_and_fano(const GaussianSignChannel& ch,
                                    const std::function<int(double)>& rule, long samples,
                                    std::uint64_t seed);

struct MaxEntropyBinary {
  double x = 0.0; // artanh(mu)
  double p_plus = 0.5;
  double p_minus = 0.5;
};

/// Maximum-entropy law on {+1,-1} under mean constraint mu: p(y) =
/// exp(x*y) / (2 cosh x) with mu = tanh(x). |mu| >= 1 raises
/// Error(InfeasibleMean).
MaxEntropyBinary max_entropy_binary(double mu);

struct CvReport {
  double mean_gap = 0.0;
  double predicted_gap = 0.0; // leading Taylor coefficient b^2 / (2 a^2)
  double ratio = 0.0;
  bool in_regime = false; // a >= 5b
  int trials = 0;
};

/// Monte Carlo entropy deficit of normalized |x_i|, x_i iid N(a, b^2),
/// against the coefficient-of-variation prediction.
CvReport cv_entropy_asymptotic(double a, double b, int n, int trials, std::uint64_t seed);

/// Equiprobable grid over the channel marginal (mixture quantiles at cell
/// centers).
std::vector<double> channel_grid(const GaussianSignChannel& ch, int points);

struct IbStats {
  double mi_xt = 0.0;
  double mi_ty = 0.0;
};

/// Plug-in mutual informations for a deterministic representation t(x) on a
/// finite grid of X.
IbStats ib_stats(const GaussianSignChannel& ch, std::span<const double> grid,
                 const std::function<double(double)>& repr);

/// I(X;T) - beta * I(T;Y).
double ib_objective(const GaussianSignChannel& ch, std::span<const double> grid,
                    const std::function<double(double)>& repr, double beta);

/// tanh(mu/sigma^2 * x) quantized to `levels` uniform bins over [-1, 1]
/// (bin centers as values).
std::function<double(double)> make_tanh_quantizer(const GaussianSignChannel& ch, int levels);

} // namespace hlens

#endif
