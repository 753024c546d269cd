#include "hlens/entropy.hpp"

#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hlens {

ProbabilityVector ProbabilityVector::make(std::vector<double> w) {
  if (w.empty()) raise(Err::DegenerateSpectrum, "empty weight vector");
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v))
      raise(Err::DegenerateSpectrum, "weights must be finite and nonnegative");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    raise(Err::DegenerateSpectrum, "weights sum to " + std::to_string(total) + ", not 1");
  return ProbabilityVector{std::move(w)};
}

ProbabilityVector spectrum_to_distribution(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) raise(Err::DegenerateSpectrum, "empty spectrum");
  double lmax = 0.0;
  for (double v : eigenvalues) lmax = std::max(lmax, std::fabs(v));
  if (lmax == 0.0) raise(Err::DegenerateSpectrum, "all-zero spectrum");
  const double tol = 1e-12 * lmax;

  std::vector<double> w(eigenvalues.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = std::fabs(eigenvalues[i]);
    w[i] = (m > tol) ? m : 0.0;
  }
  const double total = kernels::sum(w);
  for (double& v : w) v /= total;
  const double check = kernels::sum(w);
  if (std::fabs(check - 1.0) > 1e-13)
    for (double& v : w) v /= check;
  return ProbabilityVector{std::move(w)};
}

double shannon_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (double v : p.weights) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

EntropyReport renyi_matrix_entropy(const SymMatrix& R, double alpha) {
  if (!(alpha > 0.0)) raise(Err::InvalidOrder, "alpha must be > 0");
  const int n = R.n;
  const double ln_n = std::log(static_cast<double>(n));
  double entropy = 0.0;
  if (alpha == 1.0) {
    const SpectralDecomposition spec = jacobi_eigendecompose(R);
    const std::vector<double> lam = clip_psd_eigenvalues(spec.eigenvalues);
    for (double v : lam) {
      if (v == 0.0) continue;
      const double q = v / static_cast<double>(n);
      entropy -= q * std::log(q);
    }
  } else {
    entropy = std::log(matrix_power_trace(R, alpha)) / (1.0 - alpha);
  }
  return EntropyReport{alpha, entropy, ln_n - entropy, n};
}

EntropyReport hessian_entropy_gap(const SymMatrix& H) {
  const SpectralDecomposition spec = jacobi_eigendecompose(H);
  return spectral_entropy_gap(spec.eigenvalues);
}

EntropyReport spectral_entropy_gap(std::span<const double> eigenvalues) {
  const ProbabilityVector p = spectrum_to_distribution(eigenvalues);
  const double h = shannon_entropy(p);
  const double ln_n = std::log(static_cast<double>(eigenvalues.size()));
  return EntropyReport{1.0, h, ln_n - h, static_cast<int>(eigenvalues.size())};
}

std::pair<double, double> condition_entropy_bound(int n, double k) {
  if (n < 2) raise(Err::InvalidOrder, "n must be >= 2");
  if (!(k >= 1.0)) raise(Err::InvalidOrder, "condition number must be >= 1");
  const double nn = static_cast<double>(n);
  const double bound1 = (k / (k + nn - 1.0)) * std::log(k) - std::log((nn + k - 1.0) / nn);
  const double bound2 = std::log(k);
  return {bound1, bound2};
}

ProbabilityVector extremal_distribution(int n, double k) {
  if (n < 2) raise(Err::InvalidOrder, "n must be >= 2");
  if (!(k >= 1.0)) raise(Err::InvalidOrder, "condition number must be >= 1");
  const double denom = k + static_cast<double>(n) - 1.0;
  std::vector<double> w(static_cast<std::size_t>(n), 1.0 / denom);
  w[0] = k / denom;
  return ProbabilityVector{std::move(w)};
}

double tv_distance_to_uniform(const ProbabilityVector& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p.weights) s += std::fabs(v - u);
  return 0.5 * s;
}

double imbalance_coefficient(const ProbabilityVector& p) { return tv_distance_to_uniform(p); }

} // namespace hlens
