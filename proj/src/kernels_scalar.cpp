// Scalar reference backend. The 4-lane blocked reduction order and explicit
// std::fma calls mirror the AVX2 backend exactly; see kernels.hpp for the
// bitwise-equality contract.

#include "hlens/kernels.hpp"

#include <cmath>

namespace hlens::kernels {
namespace {

double k_sum(const double* x, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i];
    s1 += x[i + 1];
    s2 += x[i + 2];
    s3 += x[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += x[i];
  return s;
}

double k_dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = std::fma(a[i], b[i], s0);
    s1 = std::fma(a[i + 1], b[i + 1], s1);
    s2 = std::fma(a[i + 2], b[i + 2], s2);
    s3 = std::fma(a[i + 3], b[i + 3], s3);
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double k_abs_sum(const double* x, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += std::fabs(x[i]);
    s1 += std::fabs(x[i + 1]);
    s2 += std::fabs(x[i + 2]);
    s3 += std::fabs(x[i + 3]);
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double k_sq_sum(const double* x, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = std::fma(x[i], x[i], s0);
    s1 = std::fma(x[i + 1], x[i + 1], s1);
    s2 = std::fma(x[i + 2], x[i + 2], s2);
    s3 = std::fma(x[i + 3], x[i + 3], s3);
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s = std::fma(x[i], x[i], s);
  return s;
}

// max semantics match vmaxpd: (acc > v) ? acc : v.
double k_max_abs(const double* x, std::size_t n) {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double v0 = std::fabs(x[i]), v1 = std::fabs(x[i + 1]);
    const double v2 = std::fabs(x[i + 2]), v3 = std::fabs(x[i + 3]);
    m0 = (m0 > v0) ? m0 : v0;
    m1 = (m1 > v1) ? m1 : v1;
    m2 = (m2 > v2) ? m2 : v2;
    m3 = (m3 > v3) ? m3 : v3;
  }
  const double c01 = (m0 > m1) ? m0 : m1;
  const double c23 = (m2 > m3) ? m2 : m3;
  double m = (c01 > c23) ? c01 : c23;
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = (m > v) ? m : v;
  }
  return m;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void k_scale(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void k_scale_add(double beta, double* m, const double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) m[i] = std::fma(beta, m[i], g[i]);
}

void k_lerp(double beta, double* m, const double* g, std::size_t n) {
  const double w = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i) m[i] = std::fma(beta, m[i], w * g[i]);
}

void k_lerp_to(double beta, const double* m, const double* g, double* out, std::size_t n) {
  const double w = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(beta, m[i], w * g[i]);
}

void k_sq_lerp(double beta, double* v, const double* g, std::size_t n) {
  const double w = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i) v[i] = std::fma(beta, v[i], w * (g[i] * g[i]));
}

void k_sign_update(double eta, const double* u, double* theta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (u[i] > 0.0) ? 1.0 : ((u[i] < 0.0) ? -1.0 : 0.0);
    theta[i] = theta[i] - eta * s;
  }
}

void k_adam_update(double eta, double c1, double c2, double eps, const double* m, const double* v,
                   double* theta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mh = m[i] * c1;
    const double vh = v[i] * c2;
    theta[i] = theta[i] - eta * (mh / (std::sqrt(vh) + eps));
  }
}

void k_rot2(double c, double s, double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = std::fma(-s, yi, c * xi);
    y[i] = std::fma(c, yi, s * xi);
  }
}

const Ops scalar_table = {
    k_sum,  k_dot,       k_abs_sum, k_sq_sum,  k_max_abs,     k_axpy,        k_scale,
    k_scale_add, k_lerp, k_lerp_to, k_sq_lerp, k_sign_update, k_adam_update, k_rot2,
};

} // namespace

namespace detail {
const Ops* scalar_ops() { return &scalar_table; }
} // namespace detail

} // namespace hlens::kernels
