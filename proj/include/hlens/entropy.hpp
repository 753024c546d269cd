#ifndef HLENS_ENTROPY_HPP
#define HLENS_ENTROPY_HPP

#include "hlens/symmat.hpp"

#include <span>
#include <utility>
#include <vector>

namespace hlens {

/// Normalized nonnegative weights; carrier of spectral densities and binary
/// label laws. Construction validates sum-to-one within 1e-12.
struct ProbabilityVector {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }

  static ProbabilityVector make(std::vector<double> w);
};

struct EntropyReport {
  double alpha = 1.0;
  double entropy = 0.0; // nats
  double gap = 0.0;     // ln n - entropy
  int dimension = 0;
};

/// Spectral density of a possibly indefinite spectrum: p_i = |l_i| / sum |l_j|.
/// Entries at or below 1e-12 of the largest magnitude count as exact zeros;
/// an all-zero spectrum raises Error(DegenerateSpectrum).
ProbabilityVector spectrum_to_distribution(std::span<const double> eigenvalues);

/// -sum p ln p in nats, with 0 ln 0 = 0 by branch.
double shannon_entropy(const ProbabilityVector& p);

/// alpha-order matrix entropy H_alpha(R) = ln[tr((R/n)^alpha)] / (1-alpha);
/// alpha = 1 dispatches to the von Neumann form -tr((R/n) ln(R/n)) evaluated
/// spectrally. R must be PSD after clipping.
EntropyReport renyi_matrix_entropy(const SymMatrix& R, double alpha);

/// ln n minus the Shannon entropy of the absolute-eigenvalue spectral
/// density; defined for indefinite Hessians.
EntropyReport hessian_entropy_gap(const SymMatrix& H);

/// Same gap computed directly from a raw eigenvalue list.
EntropyReport spectral_entropy_gap(std::span<const double> eigenvalues);

/// Bounds of the entropy/condition-number theorem:
/// bound1 = (k/(k+n-1)) ln k - ln((n+k-1)/n), bound2 = ln k.
std::pair<double, double> condition_entropy_bound(int n, double k);

/// Minimum-entropy distribution under max/min ratio k: one weight k/(k+n-1)
/// and n-1 weights 1/(k+n-1).
ProbabilityVector extremal_distribution(int n, double k);

/// (1/2) sum |p_i - 1/n|.
double tv_distance_to_uniform(const ProbabilityVector& p);

/// Alias of tv_distance_to_uniform; the A-B lemma names the same quantity C.
double imbalance_coefficient(const ProbabilityVector& p);

} // namespace hlens

#endif
