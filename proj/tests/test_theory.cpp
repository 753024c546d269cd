#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlens/errors.hpp"
#include "hlens/rng.hpp"
#include "hlens/symmat.hpp"
#include "hlens/theory.hpp"
#include "hlens/theory_checks.hpp"

#include <cmath>
#include <vector>

using namespace hlens;

TEST_CASE("laplace posterior") {
  // H = 0, sigma^2 = 1 -> covariance I.
  const GaussianSpec flat = laplace_posterior(SymMatrix::zero(2), 1.0, std::vector<double>{0, 0});
  CHECK(flat.covariance.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.covariance.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.covariance.at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // Scalar: H = 3, sigma^2 = 1 -> covariance 1/4.
  const GaussianSpec s =
      laplace_posterior(SymMatrix::diagonal(std::vector<double>{3.0}), 1.0, std::vector<double>{0.5});
  CHECK(s.covariance.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(s.mean[0] == 0.5);

  // H + I/sigma^2 must be positive definite.
  CHECK_THROWS_AS(
      laplace_posterior(SymMatrix::diagonal(std::vector<double>{-5.0}), 1.0, std::vector<double>{0.0}),
      Error);
}

TEST_CASE("gaussian kl closed forms") {
  GaussianSpec q, p;
  q.mean = {0.0};
  p.mean = {0.0};
  q.covariance = SymMatrix::diagonal(std::vector<double>{0.25});
  p.covariance = SymMatrix::diagonal(std::vector<double>{1.0});
  // 0.5*(0.25 - 1 + ln 4) = 0.318147...
  CHECK(gaussian_kl(q, p) == doctest::Approx(0.3181471805599453).epsilon(1e-12));

  // Equal distributions: exactly zero.
  CHECK(gaussian_kl(p, p) == doctest::Approx(0.0).epsilon(1e-12));

  // Equal unit variances, mean shift m: KL = m^2/2.
  q.covariance = SymMatrix::diagonal(std::vector<double>{1.0});
  q.mean = {0.7};
  CHECK(gaussian_kl(q, p) == doctest::Approx(0.5 * 0.7 * 0.7).epsilon(1e-12));

  GaussianSpec wrong = p;
  wrong.mean = {0.0, 0.0};
  wrong.covariance = SymMatrix::identity(2);
  CHECK_THROWS_AS(gaussian_kl(q, wrong), Error);
}

TEST_CASE("gaussian kl is nonnegative, zero only at equality") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform_int(4));
    GaussianSpec q, p;
    q.mean.resize(static_cast<std::size_t>(d));
    p.mean.resize(static_cast<std::size_t>(d));
    for (double& v : q.mean) v = rng.normal();
    for (double& v : p.mean) v = rng.normal();
    SymMatrix bq = SymMatrix::zero(d), bp = SymMatrix::zero(d);
    for (double& v : bq.a) v = rng.normal();
    for (double& v : bp.a) v = rng.normal();
    q.covariance = SymMatrix::zero(d);
    p.covariance = SymMatrix::zero(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double sq = 0.0, sp = 0.0;
        for (int k = 0; k < d; ++k) {
          sq += bq.at(i, k) * bq.at(j, k);
          sp += bp.at(i, k) * bp.at(j, k);
        }
        q.covariance.at(i, j) = q.covariance.at(j, i) = sq + (i == j ? 0.3 : 0.0);
        p.covariance.at(i, j) = p.covariance.at(j, i) = sp + (i == j ? 0.3 : 0.0);
      }
    CHECK(gaussian_kl(q, p) >= -1e-10);
  }
}

TEST_CASE("pac-bayes bound on the diag(2,2) reference inputs") {
  // d=2, H=diag(2,2), sigma^2=1, theta*=0, n=1000, delta=0.05.
  // Printed RHS: gap = 0, radicand = (ln 20 + 2 ln 1.5 + 2 ln 4)/2000.
  // Exact route: Q = N(0, I/3), KL = 0.5*(2/3 - 2 + ln 9).
  PacBayesInputs in;
  in.H = SymMatrix::diagonal(std::vector<double>{2.0, 2.0});
  in.sigma2 = 1.0;
  in.theta_star = {0.0, 0.0};
  in.n = 1000;
  in.delta = 0.05;
  in.mu_min = 2.0;

  const PacBayesBound out = pac_bayes_bound(in);
  const double expect_radicand =
      (std::log(20.0) + 2.0 * std::log(1.5) + 2.0 * std::log(4.0)) / 2000.0;
  CHECK(out.entropy_gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out.radicand == doctest::Approx(expect_radicand).epsilon(1e-12));
  CHECK(out.bound == doctest::Approx(std::sqrt(expect_radicand)).epsilon(1e-12));

  const double expect_kl = 0.5 * (2.0 / 3.0 - 2.0 + std::log(9.0));
  CHECK(out.kl_exact == doctest::Approx(expect_kl).epsilon(1e-9));
  CHECK(out.exact_bound ==
        doctest::Approx(std::sqrt((expect_kl + std::log(20.0)) / 2000.0)).epsilon(1e-9));
}

TEST_CASE("pac-bayes bound edge behavior") {
  PacBayesInputs in;
  in.H = SymMatrix::diagonal(std::vector<double>{2.0, 2.0});
  in.sigma2 = 1.0;
  in.theta_star = {0.3, -0.2};
  in.delta = 0.05;
  in.mu_min = 2.0;

  // 1/sqrt(n) decay.
  in.n = 100;
  const double b100 = pac_bayes_bound(in).bound;
  in.n = 10000;
  const double b10k = pac_bayes_bound(in).bound;
  CHECK(b10k == doctest::Approx(b100 / 10.0).epsilon(1e-12));
  in.n = 100000000;
  CHECK(pac_bayes_bound(in).bound <= 1e-3);

  // delta = 1 zeroes the confidence term but the bound stays finite.
  in.n = 1000;
  in.delta = 1.0;
  const PacBayesBound at_one = pac_bayes_bound(in);
  CHECK(at_one.term_delta == 0.0);
  CHECK(std::isfinite(at_one.bound));

  // A negative radicand reports the term breakdown.
  PacBayesInputs bad;
  bad.H = SymMatrix::diagonal(std::vector<double>{0.1, 0.1});
  bad.sigma2 = 0.05; // (sigma^2 + mu)/d << 1 drives term_dim negative
  bad.theta_star = {0.0, 0.0};
  bad.n = 10;
  bad.delta = 1.0;
  bad.mu_min = 0.1;
  try {
    pac_bayes_bound(bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::BoundUndefined);
    CHECK(std::string(e.what()).find("dim=") != std::string::npos);
  }
}

TEST_CASE("bayes classifier and posterior") {
  const GaussianSignChannel ch{1.0, 1.0};
  CHECK(bayes_classifier(ch, 0.0) == 1);
  CHECK(bayes_classifier(ch, -0.3) == -1);
  CHECK(bayes_classifier(ch, 5.0) == 1);

  CHECK(posterior_positive(ch, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(posterior_positive(ch, 1.0) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
  // Antisymmetry p(x) + p(-x) = 1.
  for (double x : {0.1, 0.7, 2.0, 11.0})
    CHECK(posterior_positive(ch, x) + posterior_positive(ch, -x) ==
          doctest::Approx(1.0).epsilon(1e-12));

  CHECK(posterior_mean(ch, 0.0) == 0.0);
  CHECK(posterior_mean(ch, 1.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  for (double x : {0.2, 1.5, 6.0}) {
    CHECK(posterior_mean(ch, -x) == -posterior_mean(ch, x));
    CHECK(std::fabs(posterior_mean(ch, x)) < 1.0);
    // Agreement of the two formulas: 2 p(+1|x) - 1 = tanh(mu x / sigma^2).
    CHECK(2.0 * posterior_positive(ch, x) - 1.0 ==
          doctest::Approx(posterior_mean(ch, x)).epsilon(1e-12));
  }
}

TEST_CASE("bayes error closed form") {
  CHECK(bayes_error({0.0, 1.0}) == 0.5);
  CHECK(bayes_error({1.0, 1.0}) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
  CHECK(bayes_error({30.0, 1.0}) <= 1e-12);
  CHECK(bayes_error({0.5, 2.0}) == doctest::Approx(normal_cdf(-0.25)).epsilon(1e-15));
}

TEST_CASE("normal cdf sanity") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-13));
  CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-13));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
}

TEST_CASE("empirical error and fano") {
  const GaussianSignChannel unit{1.0, 1.0};
  const auto bayes = [&unit](double x) { return bayes_classifier(unit, x); };
  const FanoReport rep = empirical_error_and_fano(unit, bayes, 1000000, 12);
  CHECK(std::fabs(rep.epsilon_hat - 0.158655) <= 0.002);
  CHECK(rep.holds);

  // mu = 0: error 0.5, H_b = ln 2.
  const GaussianSignChannel null{0.0, 1.0};
  const FanoReport rep0 = empirical_error_and_fano(null, bayes, 1000000, 13);
  CHECK(std::fabs(rep0.epsilon_hat - 0.5) <= 0.002);
  CHECK(rep0.binary_entropy_of_eps == doctest::Approx(std::log(2.0)).epsilon(1e-5));
  CHECK(rep0.holds);

  // Constant rule: conditional entropy equals H(Y) and Fano is an equality.
  const auto constant = [](double) { return 1; };
  const FanoReport repc = empirical_error_and_fano(unit, constant, 1000000, 14);
  CHECK(std::fabs(repc.epsilon_hat - 0.5) <= 0.002);
  CHECK(repc.cond_entropy_hat ==
        doctest::Approx(repc.binary_entropy_of_eps).epsilon(1e-12));
  CHECK(repc.holds);

  CHECK_THROWS_AS(empirical_error_and_fano(unit, bayes, 100, 1), Error);
}

TEST_CASE("max entropy binary") {
  const MaxEntropyBinary zero = max_entropy_binary(0.0);
  CHECK(zero.x == 0.0);
  CHECK(zero.p_plus == doctest::Approx(0.5).epsilon(1e-15));

  const MaxEntropyBinary one = max_entropy_binary(std::tanh(1.0));
  CHECK(one.x == doctest::Approx(1.0).epsilon(1e-12));

  for (double mu : {-0.9, -0.3, 0.0, 0.45, 0.99}) {
    const MaxEntropyBinary me = max_entropy_binary(mu);
    CHECK(me.p_plus - me.p_minus == doctest::Approx(mu).epsilon(1e-12));
    CHECK(me.p_plus + me.p_minus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::tanh(me.x) == doctest::Approx(mu).epsilon(1e-12));
  }
  CHECK_THROWS_AS(max_entropy_binary(1.0), Error);
  CHECK_THROWS_AS(max_entropy_binary(-1.2), Error);
}

TEST_CASE("cv entropy asymptotic") {
  // b = 0: every weight equals 1/n, gap vanishes.
  const CvReport zero = cv_entropy_asymptotic(3.0, 0.0, 2000, 3, 1);
  CHECK(std::fabs(zero.mean_gap) <= 1e-12);

  // a=10, b=1, n=1e4: mean gap near b^2/(2a^2) = 0.005.
  const CvReport main = cv_entropy_asymptotic(10.0, 1.0, 10000, 50, 2);
  CHECK(main.predicted_gap == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(main.in_regime);
  CHECK(main.ratio >= 0.8);
  CHECK(main.ratio <= 1.2);

  // Doubling a quarters the gap, within 20%.
  const CvReport wide = cv_entropy_asymptotic(20.0, 1.0, 10000, 50, 3);
  const double shrink = wide.mean_gap / main.mean_gap;
  CHECK(shrink >= 0.25 * 0.8);
  CHECK(shrink <= 0.25 * 1.2);

  // Outside the Taylor regime: still computed, flagged.
  const CvReport rough = cv_entropy_asymptotic(1.0, 1.0, 2000, 3, 4);
  CHECK_FALSE(rough.in_regime);
  CHECK(std::isfinite(rough.mean_gap));

  CHECK_THROWS_AS(cv_entropy_asymptotic(10.0, 1.0, 100, 3, 1), Error);
}

TEST_CASE("ib objective on canonical representations") {
  const GaussianSignChannel ch{1.0, 1.0};
  const std::vector<double> grid = channel_grid(ch, 512);
  REQUIRE(grid.size() == 512);
  // Quantiles are sorted and symmetric about zero for the symmetric mixture.
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(grid[255] + grid[256] == doctest::Approx(0.0).epsilon(1e-9));

  // Constant representation: both informations vanish.
  CHECK(ib_objective(ch, grid, [](double) { return 0.0; }, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Identity: I(T;Y) = I(X;Y), I(X;T) = ln 512.
  const IbStats ident = ib_stats(ch, grid, [](double x) { return x; });
  CHECK(ident.mi_xt == doctest::Approx(std::log(512.0)).epsilon(1e-12));
  CHECK(ident.mi_ty == doctest::Approx(0.3368).epsilon(2e-3));

  // Tanh quantized to 64 levels keeps I(T;Y) within 1e-3 nats of identity at
  // a fraction of I(X;T); the sign rule compresses more but loses more.
  const IbStats tq = ib_stats(ch, grid, make_tanh_quantizer(ch, 64));
  const IbStats sg =
      ib_stats(ch, grid, [&ch](double x) { return static_cast<double>(bayes_classifier(ch, x)); });
  CHECK(ident.mi_ty - tq.mi_ty <= 1e-3);
  CHECK(tq.mi_xt <= 0.75 * ident.mi_xt);
  CHECK(sg.mi_xt <= std::log(2.0) + 1e-12);
  CHECK(sg.mi_ty < tq.mi_ty);

  CHECK_THROWS_AS(ib_objective(ch, std::vector<double>{}, [](double x) { return x; }, 1.0), Error);
}

TEST_CASE("full theory check battery passes and is seed-stable") {
  const auto checks = run_theory_checks(1);
  CHECK(checks.size() >= 10);
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
}
