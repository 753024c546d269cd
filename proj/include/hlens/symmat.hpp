#ifndef HLENS_SYMMAT_HPP
#define HLENS_SYMMAT_HPP

#include <span>
#include <vector>

namespace hlens {

/// Dense symmetric matrix, row-major. Carrier of every Hessian in the
/// project. validate() enforces symmetry to 1e-10 relative and finiteness.
struct SymMatrix {
  int n = 0;
  std::vector<double> a; // n*n, row-major

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * n; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * n; }

  static SymMatrix zero(int n);
  static SymMatrix identity(int n);
  static SymMatrix diagonal(std::span<const double> d);
  /// Builds from row-major entries, validating the SymMatrix invariants.
  static SymMatrix from_rows(int n, std::vector<double> entries);

  void validate() const; // throws Error(InvalidMatrix)
};

/// Eigenstructure of a SymMatrix: eigenvalues sorted descending,
/// eigenvectors stored as the columns of an orthonormal matrix.
struct SpectralDecomposition {
  int n = 0;
  std::vector<double> eigenvalues;  // descending
  std::vector<double> eigenvectors; // row-major n*n; column j pairs with eigenvalues[j]

  double vec(int i, int j) const { return eigenvectors[static_cast<std::size_t>(i) * n + j]; }
};

/// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
/// Frobenius norm falls below 1e-12 of the input Frobenius norm; at most
/// 100 sweeps, otherwise Error(ConvergenceFailure) reporting the residual.
/// Deterministic: identical input bits give identical output bits.
SpectralDecomposition jacobi_eigendecompose(const SymMatrix& A);

/// lambda_max / lambda_min of a positive-definite spectrum.
double condition_number(const SpectralDecomposition& spec);

double trace(const SymMatrix& A);

/// tr((A/n)^alpha) evaluated spectrally with 0^alpha = 0. Eigenvalues within
/// 1e-10*(1+|lambda_max|) of zero are clipped to 0; anything more negative
/// raises Error(NotPSD).
double matrix_power_trace(const SymMatrix& A, double alpha);

/// PSD clip used before entropy/power evaluation (see matrix_power_trace).
std::vector<double> clip_psd_eigenvalues(std::span<const double> eigenvalues);

} // namespace hlens

#endif
