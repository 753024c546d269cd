// AVX2+FMA backend. Compiled with -mavx2 -mfma on x86-64 only; the dispatcher
// selects it after a CPUID check. Accumulation order and fused operations
// match kernels_scalar.cpp exactly, so results are bit-identical.

#include "hlens/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace hlens::kernels {
namespace {

inline double combine4(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d abs_pd(__m256d v) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(signmask, v);
}

double k_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = combine4(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double k_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = combine4(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double k_abs_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  double s = combine4(acc);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double k_sq_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = combine4(acc);
  for (; i < n; ++i) s = std::fma(x[i], x[i], s);
  return s;
}

double k_max_abs(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  const double c01 = (lanes[0] > lanes[1]) ? lanes[0] : lanes[1];
  const double c23 = (lanes[2] > lanes[3]) ? lanes[2] : lanes[3];
  double m = (c01 > c23) ? c01 : c23;
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = (m > v) ? m : v;
  }
  return m;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void k_scale(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void k_scale_add(double beta, double* m, const double* g, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(m + i), _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(m + i, r);
  }
  for (; i < n; ++i) m[i] = std::fma(beta, m[i], g[i]);
}

void k_lerp(double beta, double* m, const double* g, std::size_t n) {
  const double w = 1.0 - beta;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vw, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(m + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(m + i), t));
  }
  for (; i < n; ++i) m[i] = std::fma(beta, m[i], w * g[i]);
}

void k_lerp_to(double beta, const double* m, const double* g, double* out, std::size_t n) {
  const double w = 1.0 - beta;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vw, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(m + i), t));
  }
  for (; i < n; ++i) out[i] = std::fma(beta, m[i], w * g[i]);
}

void k_sq_lerp(double beta, double* v, const double* g, std::size_t n) {
  const double w = 1.0 - beta;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d t = _mm256_mul_pd(vw, _mm256_mul_pd(vg, vg));
    _mm256_storeu_pd(v + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(v + i), t));
  }
  for (; i < n; ++i) v[i] = std::fma(beta, v[i], w * (g[i] * g[i]));
}

void k_sign_update(double eta, const double* u, double* theta, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d veta = _mm256_set1_pd(eta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vu = _mm256_loadu_pd(u + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(vu, zero, _CMP_GT_OQ), one);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(vu, zero, _CMP_LT_OQ), one);
    const __m256d s = _mm256_sub_pd(pos, neg);
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(theta + i), _mm256_mul_pd(veta, s));
    _mm256_storeu_pd(theta + i, r);
  }
  for (; i < n; ++i) {
    const double s = (u[i] > 0.0) ? 1.0 : ((u[i] < 0.0) ? -1.0 : 0.0);
    theta[i] = theta[i] - eta * s;
  }
}

void k_adam_update(double eta, double c1, double c2, double eps, const double* m, const double* v,
                   double* theta, std::size_t n) {
  const __m256d vc1 = _mm256_set1_pd(c1);
  const __m256d vc2 = _mm256_set1_pd(c2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d veta = _mm256_set1_pd(eta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mh = _mm256_mul_pd(_mm256_loadu_pd(m + i), vc1);
    const __m256d vh = _mm256_mul_pd(_mm256_loadu_pd(v + i), vc2);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vh), veps);
    const __m256d q = _mm256_div_pd(mh, den);
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(theta + i), _mm256_mul_pd(veta, q));
    _mm256_storeu_pd(theta + i, r);
  }
  for (; i < n; ++i) {
    const double mh = m[i] * c1;
    const double vh = v[i] * c2;
    theta[i] = theta[i] - eta * (mh / (std::sqrt(vh) + eps));
  }
}

void k_rot2(double c, double s, double* x, double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d xn = _mm256_fnmadd_pd(vs, vy, _mm256_mul_pd(vc, vx));
    const __m256d yn = _mm256_fmadd_pd(vc, vy, _mm256_mul_pd(vs, vx));
    _mm256_storeu_pd(x + i, xn);
    _mm256_storeu_pd(y + i, yn);
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = std::fma(-s, yi, c * xi);
    y[i] = std::fma(c, yi, s * xi);
  }
}

const Ops avx2_table = {
    k_sum,  k_dot,       k_abs_sum, k_sq_sum,  k_max_abs,     k_axpy,        k_scale,
    k_scale_add, k_lerp, k_lerp_to, k_sq_lerp, k_sign_update, k_adam_update, k_rot2,
};

} // namespace

namespace detail {
const Ops* avx2_ops_table() { return &avx2_table; }
} // namespace detail

} // namespace hlens::kernels
