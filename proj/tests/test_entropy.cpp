#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlens/entropy.hpp"
#include "hlens/errors.hpp"
#include "hlens/rng.hpp"
#include "hlens/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace hlens;

namespace {

std::vector<double> random_simplex(Rng& rng, int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  double s = 0.0;
  for (double& v : a) {
    v = -std::log(1.0 - rng.uniform());
    if (v == 0.0) v = 1e-300;
    s += v;
  }
  for (double& v : a) v /= s;
  return a;
}

} // namespace

TEST_CASE("spectrum_to_distribution") {
  const auto p1 = spectrum_to_distribution(std::vector<double>{1, 1, 1, 1});
  for (double w : p1.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-14));

  const auto p2 = spectrum_to_distribution(std::vector<double>{2, -2});
  CHECK(p2[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p2[1] == doctest::Approx(0.5).epsilon(1e-14));

  const auto p3 = spectrum_to_distribution(std::vector<double>{3, 1, 0});
  CHECK(p3[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p3[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p3[2] == 0.0);

  CHECK_THROWS_AS(spectrum_to_distribution(std::vector<double>{0.0, 0.0}), Error);
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(ProbabilityVector::make({0.25, 0.25, 0.25, 0.25})) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(shannon_entropy(ProbabilityVector::make({1.0, 0.0, 0.0})) == 0.0);
  // Hand evaluation: -0.75 ln 0.75 - 0.25 ln 0.25 = 0.562335...
  CHECK(shannon_entropy(ProbabilityVector::make({0.75, 0.25})) ==
        doctest::Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("renyi matrix entropy") {
  for (int n : {2, 5}) {
    const auto r1 = renyi_matrix_entropy(SymMatrix::identity(n), 1.0);
    CHECK(r1.entropy == doctest::Approx(std::log(n)).epsilon(1e-12));
    CHECK(r1.gap == doctest::Approx(0.0).epsilon(1e-12));
    const auto r2 = renyi_matrix_entropy(SymMatrix::identity(n), 2.0);
    CHECK(r2.entropy == doctest::Approx(std::log(n)).epsilon(1e-12));
  }

  // Trace-normalized diag(3,1): eigenvalues sum to n, so the von Neumann
  // entropy equals the Shannon entropy of eigenvalues/n.
  const std::vector<double> d{3.0, 1.0};
  SymMatrix m = SymMatrix::diagonal(d);
  for (double& v : m.a) v *= 2.0 / 4.0; // trace 4 -> trace 2
  const auto rep = renyi_matrix_entropy(m, 1.0);
  CHECK(rep.entropy ==
        doctest::Approx(shannon_entropy(ProbabilityVector::make({0.75, 0.25}))).epsilon(1e-12));

  CHECK_THROWS_AS(renyi_matrix_entropy(SymMatrix::identity(2), 0.0), Error);
  CHECK_THROWS_AS(renyi_matrix_entropy(SymMatrix::identity(2), -1.0), Error);
}

TEST_CASE("hessian entropy gap") {
  CHECK(hessian_entropy_gap(SymMatrix::identity(3)).gap == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<double> point{1.0, 0.0, 0.0};
  CHECK(hessian_entropy_gap(SymMatrix::diagonal(point)).gap ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const std::vector<double> d{3.0, 1.0};
  CHECK(hessian_entropy_gap(SymMatrix::diagonal(d)).gap ==
        doctest::Approx(std::log(2.0) - 0.5623351446188083).epsilon(1e-9));

  CHECK_THROWS_AS(hessian_entropy_gap(SymMatrix::zero(2)), Error);
}

TEST_CASE("condition entropy bound") {
  const auto [b1a, b2a] = condition_entropy_bound(2, 1.0);
  CHECK(b1a == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b2a == doctest::Approx(0.0).epsilon(1e-14));

  // (n=2, k=3): 0.75 ln 3 - ln 2, and it matches the gap of (3/4, 1/4).
  const auto [b1b, b2b] = condition_entropy_bound(2, 3.0);
  CHECK(b1b == doctest::Approx(0.75 * std::log(3.0) - std::log(2.0)).epsilon(1e-14));
  CHECK(b1b ==
        doctest::Approx(std::log(2.0) - shannon_entropy(ProbabilityVector::make({0.75, 0.25})))
            .epsilon(1e-12));
  CHECK(b2b == doctest::Approx(std::log(3.0)).epsilon(1e-14));

  const auto [b1c, b2c] = condition_entropy_bound(4, 10.0);
  CHECK(b1c <= std::log(10.0) + 1e-12);
  CHECK(b2c == doctest::Approx(std::log(10.0)).epsilon(1e-14));
}

TEST_CASE("extremal distribution") {
  const auto p = extremal_distribution(2, 3.0);
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-14));

  const auto u = extremal_distribution(3, 1.0);
  for (double w : u.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto q = extremal_distribution(4, 5.0);
  CHECK(q[0] == doctest::Approx(0.625).epsilon(1e-14));
  for (int i = 1; i < 4; ++i)
    CHECK(q[static_cast<std::size_t>(i)] == doctest::Approx(0.125).epsilon(1e-14));
  // max/min ratio is exactly k
  CHECK(q[0] / q[1] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("tv distance and imbalance coefficient") {
  const auto uniform = ProbabilityVector::make({0.25, 0.25, 0.25, 0.25});
  CHECK(tv_distance_to_uniform(uniform) == 0.0);
  const auto point = ProbabilityVector::make({1.0, 0.0});
  CHECK(tv_distance_to_uniform(point) == doctest::Approx(0.5).epsilon(1e-14));
  const auto skew = ProbabilityVector::make({0.75, 0.25});
  CHECK(tv_distance_to_uniform(skew) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(imbalance_coefficient(skew) == tv_distance_to_uniform(skew));
}

TEST_CASE("gap-condition bound holds on random positive spectra") {
  Rng rng(555);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(63));
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (double& v : lam) v = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    const double k = *std::max_element(lam.begin(), lam.end()) /
                     *std::min_element(lam.begin(), lam.end());
    const double gap = spectral_entropy_gap(lam).gap;
    const auto [b1, b2] = condition_entropy_bound(n, k);
    CHECK(gap <= b1 + 1e-9);
    CHECK(b1 <= b2 + 1e-9);
    // Tightness at the extremal distribution.
    const double ext_gap = std::log(n) - shannon_entropy(extremal_distribution(n, k));
    CHECK(std::fabs(ext_gap - b1) <= 1e-9);
  }
}

// The paper prints the A-B lemma as A - B >= C ln(amax/amin), but that
// direction is false for n >= 3 (the proof's monotonicity step is inverted);
// applying the bounds the valid way round gives <=, with equality at n = 2.
// The corrected direction is verified here; the counterexample below pins
// the misstatement.
TEST_CASE("A-B lemma (corrected direction) and TV lemma on random simplex points") {
  Rng rng(777);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(63));
    const ProbabilityVector p{random_simplex(rng, n)};
    double amax = 0.0, amin = 1.0, log_sum = 0.0;
    for (double v : p.weights) {
      amax = std::max(amax, v);
      amin = std::min(amin, v);
      log_sum += std::log(v);
    }
    const double A = -log_sum / static_cast<double>(n);
    const double B = shannon_entropy(p);
    const double C = imbalance_coefficient(p);
    CHECK(A - B <= C * std::log(amax / amin) + 1e-12);
    CHECK(A - B >= -1e-12); // mean log always dominates the entropy
    CHECK(std::log(n) - B <= static_cast<double>(n) * tv_distance_to_uniform(p) + 1e-12);
  }
}

TEST_CASE("A-B lemma printed direction fails on a 3-point counterexample") {
  const ProbabilityVector p = ProbabilityVector::make({0.8, 0.19, 0.01});
  const double A = -(std::log(0.8) + std::log(0.19) + std::log(0.01)) / 3.0;
  const double B = shannon_entropy(p);
  const double C = imbalance_coefficient(p);
  const double rhs = C * std::log(0.8 / 0.01);
  CHECK(A - B < rhs); // printed form would require A - B >= rhs
  CHECK(A - B == doctest::Approx(1.6229).epsilon(1e-3));
  CHECK(rhs == doctest::Approx(2.0452).epsilon(1e-3));
}

TEST_CASE("A-B lemma holds with equality for n = 2") {
  Rng rng(778);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(0.01, 0.99);
    const ProbabilityVector p = ProbabilityVector::make({a, 1.0 - a});
    const double A = -(std::log(a) + std::log(1.0 - a)) / 2.0;
    const double B = shannon_entropy(p);
    const double C = imbalance_coefficient(p);
    const double rhs = C * std::log(std::max(a, 1.0 - a) / std::min(a, 1.0 - a));
    CHECK(A - B == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("renyi order-1 limit is continuous") {
  Rng rng(888);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    // Random PSD with unit diagonal.
    SymMatrix b = SymMatrix::zero(n);
    for (double& v : b.a) v = rng.normal();
    SymMatrix a = SymMatrix::zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += b.at(i, k) * b.at(j, k);
        a.at(i, j) = s;
        a.at(j, i) = s;
      }
    SymMatrix r = SymMatrix::zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.at(i, j) = a.at(i, j) / std::sqrt(a.at(i, i) * a.at(j, j));
    for (int i = 0; i < n; ++i) r.at(i, i) = 1.0;

    const double h1 = renyi_matrix_entropy(r, 1.0).entropy;
    CHECK(std::fabs(renyi_matrix_entropy(r, 1.0 - 1e-5).entropy - h1) <= 1e-3);
    CHECK(std::fabs(renyi_matrix_entropy(r, 1.0 + 1e-5).entropy - h1) <= 1e-3);
  }
}

TEST_CASE("uniform spectrum maximizes entropy at fixed n") {
  Rng rng(999);
  const int n = 16;
  const double uniform_entropy =
      shannon_entropy(spectrum_to_distribution(std::vector<double>(n, 2.5)));
  CHECK(uniform_entropy == doctest::Approx(std::log(n)).epsilon(1e-12));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> lam(n);
    for (double& v : lam) v = std::exp(rng.uniform(-3.0, 3.0));
    CHECK(shannon_entropy(spectrum_to_distribution(lam)) <= uniform_entropy + 1e-12);
  }
}

TEST_CASE("probability vector invariants are enforced") {
  CHECK_THROWS_AS(ProbabilityVector::make({0.5, 0.6}), Error);
  CHECK_THROWS_AS(ProbabilityVector::make({1.5, -0.5}), Error);
  CHECK_THROWS_AS(ProbabilityVector::make({}), Error);
}
