#ifndef HLENS_KERNELS_HPP
#define HLENS_KERNELS_HPP

#include <cstddef>
#include <span>
#include <string_view>

namespace hlens::kernels {

// Data-parallel inner loops behind the numeric modules. Two backends: a
// scalar reference and an AVX2+FMA variant, selected once at runtime
// (override with HLENS_KERNELS=scalar|avx2|auto).
//
// Backends are bit-identical by construction, not merely close:
//   - reductions accumulate in a fixed 4-lane blocked order (lane l holds
//     elements l, l+4, l+8, ...), lanes combine as (s0+s1)+(s2+s3), and the
//     tail folds in afterwards in index order;
//   - multiply-accumulate steps are IEEE-754 fused in both backends
//     (std::fma / vfmadd), never left to the compiler;
//   - transcendental elementwise maps (tanh, log, exp) stay on scalar libm
//     in the calling modules and are not vectorized here.
// Equivalence tests assert bitwise equality, and experiment outputs do not
// depend on which backend ran.

enum class Backend { scalar, avx2 };

bool available(Backend b);
Backend active();
void force(Backend b); // throws Error(InvalidKind) if unavailable
std::string_view name(Backend b);

/// Resolved entry points for one backend; exposed so tests can compare
/// backends directly.
struct Ops {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*abs_sum)(const double*, std::size_t);
  double (*sq_sum)(const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  // y += a*x
  void (*axpy)(double, const double*, double*, std::size_t);
  // y = a*x
  void (*scale)(double, const double*, double*, std::size_t);
  // m = beta*m + g
  void (*scale_add)(double, double*, const double*, std::size_t);
  // m = beta*m + (1-beta)*g
  void (*lerp)(double, double*, const double*, std::size_t);
  // out = beta*m + (1-beta)*g
  void (*lerp_to)(double, const double*, const double*, double*, std::size_t);
  // v = beta*v + (1-beta)*g^2
  void (*sq_lerp)(double, double*, const double*, std::size_t);
  // theta -= eta*sign(u), sign(0) = 0
  void (*sign_update)(double, const double*, double*, std::size_t);
  // theta -= eta*(m*c1)/(sqrt(v*c2) + eps)
  void (*adam_update)(double, double, double, double, const double*, const double*, double*,
                      std::size_t);
  // x' = c*x - s*y; y' = s*x + c*y (x, y must not overlap)
  void (*rot2)(double, double, double*, double*, std::size_t);
};

const Ops& ops(Backend b); // throws Error(InvalidKind) if unavailable
const Ops& active_ops();

// Convenience wrappers over the active backend.
inline double sum(std::span<const double> x) { return active_ops().sum(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_ops().dot(a.data(), b.data(), a.size());
}
inline double abs_sum(std::span<const double> x) {
  return active_ops().abs_sum(x.data(), x.size());
}
inline double sq_sum(std::span<const double> x) { return active_ops().sq_sum(x.data(), x.size()); }
inline double max_abs(std::span<const double> x) {
  return active_ops().max_abs(x.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_ops().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<const double> x, std::span<double> y) {
  active_ops().scale(a, x.data(), y.data(), x.size());
}
inline void scale_add(double beta, std::span<double> m, std::span<const double> g) {
  active_ops().scale_add(beta, m.data(), g.data(), m.size());
}
inline void lerp(double beta, std::span<double> m, std::span<const double> g) {
  active_ops().lerp(beta, m.data(), g.data(), m.size());
}
inline void lerp_to(double beta, std::span<const double> m, std::span<const double> g,
                    std::span<double> out) {
  active_ops().lerp_to(beta, m.data(), g.data(), out.data(), m.size());
}
inline void sq_lerp(double beta, std::span<double> v, std::span<const double> g) {
  active_ops().sq_lerp(beta, v.data(), g.data(), v.size());
}
inline void sign_update(double eta, std::span<const double> u, std::span<double> theta) {
  active_ops().sign_update(eta, u.data(), theta.data(), u.size());
}
inline void adam_update(double eta, double c1, double c2, double eps, std::span<const double> m,
                        std::span<const double> v, std::span<double> theta) {
  active_ops().adam_update(eta, c1, c2, eps, m.data(), v.data(), theta.data(), m.size());
}
inline void rot2(double c, double s, std::span<double> x, std::span<double> y) {
  active_ops().rot2(c, s, x.data(), y.data(), x.size());
}

namespace detail {
const Ops* scalar_ops();
const Ops* avx2_ops(); // nullptr when not compiled in or CPU lacks AVX2+FMA
} // namespace detail

} // namespace hlens::kernels

#endif
