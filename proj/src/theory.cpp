#include "hlens/theory.hpp"

#include "hlens/entropy.hpp"
#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"
#include "hlens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace hlens {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double binary_entropy(double eps) {
  if (eps <= 0.0 || eps >= 1.0) return 0.0;
  return -eps * std::log(eps) - (1.0 - eps) * std::log(1.0 - eps);
}

GaussianSpec laplace_posterior(const SymMatrix& H, double sigma2,
                               std::span<const double> theta_star) {
  if (!(sigma2 > 0.0)) raise(Err::InvalidConfig, "prior variance must be > 0");
  if (theta_star.size() != static_cast<std::size_t>(H.n))
    raise(Err::ShapeError, "theta* does not match the Hessian dimension");
  const SpectralDecomposition spec = jacobi_eigendecompose(H);
  const double shift = 1.0 / sigma2;
  const int n = H.n;
  for (double lam : spec.eigenvalues)
    if (!(lam + shift > 0.0))
      raise(Err::NotPositiveDefinite, "H + I/sigma^2 is not positive definite");

  SymMatrix cov = SymMatrix::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += spec.vec(i, k) * spec.vec(j, k) / (spec.eigenvalues[static_cast<std::size_t>(k)] + shift);
      cov.at(i, j) = s;
      cov.at(j, i) = s;
    }
  return GaussianSpec{std::vector<double>(theta_star.begin(), theta_star.end()), std::move(cov)};
}

double gaussian_kl(const GaussianSpec& Q, const GaussianSpec& P) {
  const int d = Q.covariance.n;
  if (P.covariance.n != d || Q.mean.size() != static_cast<std::size_t>(d) ||
      P.mean.size() != static_cast<std::size_t>(d))
    raise(Err::ShapeError, "Gaussian dimensions do not match");

  const SpectralDecomposition sp = jacobi_eigendecompose(P.covariance);
  const SpectralDecomposition sq = jacobi_eigendecompose(Q.covariance);
  double logdet_p = 0.0, logdet_q = 0.0;
  for (double v : sp.eigenvalues) {
    if (!(v > 0.0)) raise(Err::NotPositiveDefinite, "prior covariance is not positive definite");
    logdet_p += std::log(v);
  }
  for (double v : sq.eigenvalues) {
    if (!(v > 0.0))
      raise(Err::NotPositiveDefinite, "posterior covariance is not positive definite");
    logdet_q += std::log(v);
  }

  // tr(Sigma_P^-1 Sigma_Q) = sum_k (v_k' Sigma_Q v_k) / lambda_k
  double tr = 0.0;
  std::vector<double> vk(static_cast<std::size_t>(d));
  std::vector<double> av(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) vk[static_cast<std::size_t>(i)] = sp.vec(i, k);
    for (int i = 0; i < d; ++i)
      av[static_cast<std::size_t>(i)] =
          kernels::dot({Q.covariance.row(i), static_cast<std::size_t>(d)}, vk);
    tr += kernels::dot(vk, av) / sp.eigenvalues[static_cast<std::size_t>(k)];
  }

  std::vector<double> w(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    w[static_cast<std::size_t>(i)] =
        Q.mean[static_cast<std::size_t>(i)] - P.mean[static_cast<std::size_t>(i)];
  double quad = 0.0;
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) vk[static_cast<std::size_t>(i)] = sp.vec(i, k);
    const double c = kernels::dot(vk, w);
    quad += c * c / sp.eigenvalues[static_cast<std::size_t>(k)];
  }

  return 0.5 * (tr + quad - static_cast<double>(d) + logdet_p - logdet_q);
}

PacBayesBound pac_bayes_bound(const PacBayesInputs& in) {
  const int d = in.H.n;
  if (in.n < 1) raise(Err::InvalidConfig, "sample count must be >= 1");
  if (!(in.delta > 0.0 && in.delta <= 1.0)) raise(Err::InvalidConfig, "delta must be in (0, 1]");
  if (!(in.sigma2 > 0.0)) raise(Err::InvalidConfig, "prior variance must be > 0");
  if (in.theta_star.size() != static_cast<std::size_t>(d))
    raise(Err::ShapeError, "theta* does not match the Hessian dimension");

  const SpectralDecomposition spec = jacobi_eigendecompose(in.H);
  const double lam_min = spec.eigenvalues.back();
  if (!(in.mu_min > 0.0) || lam_min < in.mu_min * (1.0 - 1e-12))
    raise(Err::NotPositiveDefinite, "need mu_min > 0 with mu_min I <= H");

  PacBayesBound out;
  const ProbabilityVector density = spectrum_to_distribution(spec.eigenvalues);
  out.entropy_gap = std::log(static_cast<double>(d)) - shannon_entropy(density);

  const double dd = static_cast<double>(d);
  out.term_delta = std::log(1.0 / in.delta);
  out.term_dim = dd * std::log((in.sigma2 + in.mu_min) / dd);
  out.term_norm = kernels::sq_sum(in.theta_star) / in.sigma2;
  const double tr_h = kernels::sum(spec.eigenvalues);
  out.term_entropy =
      dd * (std::log(tr_h) + out.entropy_gap - out.entropy_gap * out.entropy_gap / dd);

  out.radicand = (out.term_delta + out.term_dim + out.term_norm + out.term_entropy) /
                 (2.0 * static_cast<double>(in.n));
  if (out.radicand < 0.0)
    raise(Err::BoundUndefined,
          "negative radicand: delta=" + std::to_string(out.term_delta) +
              " dim=" + std::to_string(out.term_dim) + " norm=" + std::to_string(out.term_norm) +
              " entropy=" + std::to_string(out.term_entropy));
  out.bound = std::sqrt(out.radicand);

  const GaussianSpec q = laplace_posterior(in.H, in.sigma2, in.theta_star);
  GaussianSpec p;
  p.mean.assign(static_cast<std::size_t>(d), 0.0);
  p.covariance = SymMatrix::zero(d);
  for (int i = 0; i < d; ++i) p.covariance.at(i, i) = in.sigma2;
  out.kl_exact = gaussian_kl(q, p);
  out.exact_bound = std::sqrt((out.kl_exact + out.term_delta) / (2.0 * static_cast<double>(in.n)));
  return out;
}

int bayes_classifier(const GaussianSignChannel&, double x) { return x >= 0.0 ? 1 : -1; }

double bayes_error(const GaussianSignChannel& ch) {
  if (!(ch.sigma > 0.0)) raise(Err::InvalidConfig, "sigma must be > 0");
  return normal_cdf(-ch.mu / ch.sigma);
}

double posterior_positive(const GaussianSignChannel& ch, double x) {
  if (!(ch.sigma > 0.0)) raise(Err::InvalidConfig, "sigma must be > 0");
  return 1.0 / (1.0 + std::exp(-2.0 * ch.mu * x / (ch.sigma * ch.sigma)));
}

double posterior_mean(const GaussianSignChannel& ch, double x) {
  if (!(ch.sigma > 0.0)) raise(Err::InvalidConfig, "sigma must be > 0");
  return std::tanh(ch.mu * x / (ch.sigma * ch.sigma));
}

FanoReport empirical_error_and_fano(const GaussianSignChannel& ch,
                                    const std::function<int(double)>& rule, long samples,
                                    std::uint64_t seed) {
  if (samples < 10000) raise(Err::InsufficientData, "need at least 1e4 samples");
  if (!(ch.sigma > 0.0)) raise(Err::InvalidConfig, "sigma must be > 0");

  // counts[t][y] with t, y in {-1, +1} mapped to {0, 1}
  long counts[2][2] = {{0, 0}, {0, 0}};
  Rng rng(seed);
  for (long i = 0; i < samples; ++i) {
    const int y = (rng.next_u64() & 1u) ? 1 : -1;
    const double x = static_cast<double>(y) * ch.mu + ch.sigma * rng.normal();
    const int t = rule(x) >= 0 ? 1 : -1;
    ++counts[(t + 1) / 2][(y + 1) / 2];
  }

  const double n = static_cast<double>(samples);
  FanoReport rep;
  rep.samples = samples;
  rep.epsilon_hat = (static_cast<double>(counts[0][1]) + static_cast<double>(counts[1][0])) / n;

  double cond = 0.0;
  for (int t = 0; t < 2; ++t) {
    const double nt = static_cast<double>(counts[t][0] + counts[t][1]);
    if (nt == 0.0) continue; // degenerate (constant) rules leave one column empty
    for (int y = 0; y < 2; ++y) {
      const double c = static_cast<double>(counts[t][y]);
      if (c == 0.0) continue;
      cond -= (c / n) * std::log(c / nt);
    }
  }
  rep.cond_entropy_hat = cond;
  rep.binary_entropy_of_eps = binary_entropy(rep.epsilon_hat);

  // Propagated sampling error of H_b(eps_hat) plus a plug-in bias guard for
  // the four-cell entropy estimate.
  const double eps = rep.epsilon_hat;
  double deriv = 0.0;
  if (eps > 0.0 && eps < 1.0) deriv = std::fabs(std::log((1.0 - eps) / eps));
  const double se = std::sqrt(std::max(eps * (1.0 - eps), 1.0 / n) / n);
  rep.slack = 3.0 * deriv * se + 8.0 / n;
  rep.holds = rep.cond_entropy_hat <= rep.binary_entropy_of_eps + rep.slack;
  return rep;
}

MaxEntropyBinary max_entropy_binary(double mu) {
  if (!(std::fabs(mu) < 1.0)) raise(Err::InfeasibleMean, "|mu| must be < 1");
  MaxEntropyBinary out;
  out.x = std::atanh(mu);
  // e^x / (2 cosh x) evaluated in its overflow-free form.
  out.p_plus = 1.0 / (1.0 + std::exp(-2.0 * out.x));
  out.p_minus = 1.0 - out.p_plus;
  return out;
}

CvReport cv_entropy_asymptotic(double a, double b, int n, int trials, std::uint64_t seed) {
  if (!(a > 0.0) || b < 0.0) raise(Err::InvalidConfig, "need a > 0 and b >= 0");
  if (n < 1000) raise(Err::InsufficientData, "need n >= 1000");
  if (trials < 1) raise(Err::InsufficientData, "need trials >= 1");

  std::vector<double> gaps(static_cast<std::size_t>(trials), 0.0);
  std::vector<double> mags(static_cast<std::size_t>(n));
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(t));
    for (double& v : mags) v = std::fabs(a + b * rng.normal());
    gaps[static_cast<std::size_t>(t)] = spectral_entropy_gap(mags).gap;
  }

  CvReport rep;
  rep.trials = trials;
  rep.mean_gap = kernels::sum(gaps) / static_cast<double>(trials);
  rep.predicted_gap = b * b / (2.0 * a * a);
  rep.in_regime = a >= 5.0 * b;
  rep.ratio = (rep.predicted_gap > 0.0) ? rep.mean_gap / rep.predicted_gap
                                        : (std::fabs(rep.mean_gap) < 1e-12 ? 1.0 : 0.0);
  return rep;
}

std::vector<double> channel_grid(const GaussianSignChannel& ch, int points) {
  if (points < 1) raise(Err::InvalidGrid, "grid needs at least one point");
  if (!(ch.sigma > 0.0)) raise(Err::InvalidConfig, "sigma must be > 0");
  const double mu = ch.mu, s = ch.sigma;
  auto cdf = [&](double x) {
    return 0.5 * normal_cdf((x - mu) / s) + 0.5 * normal_cdf((x + mu) / s);
  };
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    double lo = -(std::fabs(mu) + 12.0 * s);
    double hi = std::fabs(mu) + 12.0 * s;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < q ? lo : hi) = mid;
    }
    grid[static_cast<std::size_t>(k)] = 0.5 * (lo + hi);
  }
  return grid;
}

IbStats ib_stats(const GaussianSignChannel& ch, std::span<const double> grid,
                 const std::function<double(double)>& repr) {
  if (grid.empty()) raise(Err::InvalidGrid, "empty grid");
  const double px = 1.0 / static_cast<double>(grid.size());

  // Group equiprobable cells by representation value; ordered map keeps the
  // aggregation deterministic.
  std::map<double, std::pair<double, double>> cells; // t -> (mass, mass of Y=+1)
  double p_plus_total = 0.0;
  for (double x : grid) {
    const double post = posterior_positive(ch, x);
    auto& cell = cells[repr(x)];
    cell.first += px;
    cell.second += px * post;
    p_plus_total += px * post;
  }

  IbStats out;
  const double hy = binary_entropy(p_plus_total);
  double hy_given_t = 0.0;
  for (const auto& [t, cell] : cells) {
    out.mi_xt -= cell.first * std::log(cell.first);
    hy_given_t += cell.first * binary_entropy(cell.second / cell.first);
  }
  out.mi_ty = hy - hy_given_t;
  return out;
}

double ib_objective(const GaussianSignChannel& ch, std::span<const double> grid,
                    const std::function<double(double)>& repr, double beta) {
  const IbStats stats = ib_stats(ch, grid, repr);
  return stats.mi_xt - beta * stats.mi_ty;
}

std::function<double(double)> make_tanh_quantizer(const GaussianSignChannel& ch, int levels) {
  if (levels < 1) raise(Err::InvalidGrid, "need at least one level");
  const double scale = ch.mu / (ch.sigma * ch.sigma);
  const int n = levels;
  return [scale, n](double x) {
    const double t = std::tanh(scale * x);
    int bin = static_cast<int>(std::floor((t + 1.0) / 2.0 * n));
    bin = std::min(n - 1, std::max(0, bin));
    return -1.0 + (2.0 * bin + 1.0) / n;
  };
}

} // namespace hlens
