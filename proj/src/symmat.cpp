#include "hlens/symmat.hpp"

#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hlens {

SymMatrix SymMatrix::zero(int n) {
  if (n < 1) raise(Err::InvalidMatrix, "dimension must be >= 1");
  return SymMatrix{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m = zero(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m = zero(static_cast<int>(d.size()));
  for (int i = 0; i < m.n; ++i) m.at(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

SymMatrix SymMatrix::from_rows(int n, std::vector<double> entries) {
  if (n < 1 || entries.size() != static_cast<std::size_t>(n) * n)
    raise(Err::InvalidMatrix, "entry count does not match dimension");
  SymMatrix m{n, std::move(entries)};
  m.validate();
  return m;
}

void SymMatrix::validate() const {
  if (n < 1 || a.size() != static_cast<std::size_t>(n) * n)
    raise(Err::InvalidMatrix, "entry count does not match dimension");
  double max_abs = 0.0;
  for (double v : a) {
    if (!std::isfinite(v)) raise(Err::InvalidMatrix, "non-finite entry");
    max_abs = std::max(max_abs, std::fabs(v));
  }
  const double tol = 1e-10 * (1.0 + max_abs);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(at(i, j) - at(j, i)) > tol)
        raise(Err::InvalidMatrix, "matrix is not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
}

namespace {

double off_diagonal_sq(const SymMatrix& A) {
  double s = 0.0;
  for (int i = 0; i < A.n; ++i)
    for (int j = i + 1; j < A.n; ++j) s += 2.0 * A.at(i, j) * A.at(i, j);
  return s;
}

} // namespace

SpectralDecomposition jacobi_eigendecompose(const SymMatrix& input) {
  input.validate();
  const int n = input.n;
  if (n > 4096) raise(Err::InvalidMatrix, "dimension exceeds the 4096 dense limit");

  SymMatrix A = input;
  // Enforce exact symmetry so rotations stay consistent.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) A.at(j, i) = A.at(i, j);

  // VT rows are the eigenvector candidates; rotating V's columns p,q equals
  // rotating VT's rows, which keeps the kernel access contiguous.
  std::vector<double> vt(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vt[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto vt_row = [&](int i) { return std::span<double>(vt.data() + static_cast<std::size_t>(i) * n, n); };

  const double frob = std::sqrt(kernels::sq_sum(A.a));
  const double stop = 1e-12 * frob;

  int sweep = 0;
  for (; sweep < 100; ++sweep) {
    if (std::sqrt(off_diagonal_sq(A)) <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A.at(p, q);
        if (apq == 0.0) continue;
        const double app = A.at(p, p);
        const double aqq = A.at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Rotate rows p and q, then restore the 2x2 pivot block analytically
        // and mirror the rows back into the columns.
        kernels::rot2(c, s, std::span<double>(A.row(p), n), std::span<double>(A.row(q), n));
        A.at(p, p) = app - t * apq;
        A.at(q, q) = aqq + t * apq;
        A.at(p, q) = 0.0;
        A.at(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          A.at(i, p) = A.at(p, i);
          A.at(i, q) = A.at(q, i);
        }

        kernels::rot2(c, s, vt_row(p), vt_row(q));
      }
    }
  }

  const double residual = std::sqrt(off_diagonal_sq(A));
  if (residual > stop)
    raise(Err::ConvergenceFailure,
          "Jacobi did not converge in 100 sweeps; off-diagonal residual " +
              std::to_string(residual));

  // Sort descending; ties keep the lower original index first.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return A.at(x, x) > A.at(y, y); });

  SpectralDecomposition out;
  out.n = n;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  out.eigenvectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    out.eigenvalues[static_cast<std::size_t>(j)] = A.at(src, src);
    // Canonical sign: the largest-magnitude component is positive.
    const double* v = vt.data() + static_cast<std::size_t>(src) * n;
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
    const double flip = (v[imax] < 0.0) ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i)
      out.eigenvectors[static_cast<std::size_t>(i) * n + j] = flip * v[i];
  }
  return out;
}

double condition_number(const SpectralDecomposition& spec) {
  if (spec.eigenvalues.empty() || spec.eigenvalues.back() <= 0.0)
    raise(Err::NotPositiveDefinite, "condition number needs a positive-definite spectrum");
  return spec.eigenvalues.front() / spec.eigenvalues.back();
}

double trace(const SymMatrix& A) {
  double s = 0.0;
  for (int i = 0; i < A.n; ++i) s += A.at(i, i);
  return s;
}

std::vector<double> clip_psd_eigenvalues(std::span<const double> eigenvalues) {
  double lmax = 0.0;
  for (double v : eigenvalues) lmax = std::max(lmax, std::fabs(v));
  const double tol = 1e-10 * (1.0 + lmax);
  std::vector<double> out(eigenvalues.begin(), eigenvalues.end());
  for (double& v : out) {
    if (v < -tol)
      raise(Err::NotPSD, "eigenvalue " + std::to_string(v) + " below the PSD tolerance");
    if (v < tol) v = 0.0;
  }
  return out;
}

double matrix_power_trace(const SymMatrix& A, double alpha) {
  if (!(alpha > 0.0)) raise(Err::InvalidOrder, "alpha must be > 0");
  const SpectralDecomposition spec = jacobi_eigendecompose(A);
  const std::vector<double> lam = clip_psd_eigenvalues(spec.eigenvalues);
  const double n = static_cast<double>(A.n);
  double s = 0.0;
  for (double v : lam) {
    if (v == 0.0) continue; // 0^alpha = 0
    s += std::pow(v / n, alpha);
  }
  return s;
}

} // namespace hlens
