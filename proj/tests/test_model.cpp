#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlens/errors.hpp"
#include "hlens/model.hpp"
#include "hlens/rng.hpp"
#include "hlens/symmat.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <vector>

using namespace hlens;

namespace {

Dataset tiny_balanced_dataset(int m, int dim, int classes, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.dim = dim;
  d.classes = classes;
  d.split = "train";
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < dim; ++k) d.inputs.push_back(rng.normal());
    d.labels.push_back(i % classes);
  }
  return d;
}

// Central-difference gradient oracle on one coordinate.
double fd_gradient(const Mlp& model, const Dataset& data, ParamVector theta, std::size_t i,
                   double h) {
  theta[i] += h;
  const double up = forward_loss(model, data, theta);
  theta[i] -= 2.0 * h;
  const double down = forward_loss(model, data, theta);
  return (up - down) / (2.0 * h);
}

} // namespace

TEST_CASE("mlp block table partitions the parameter vector") {
  const Mlp m = Mlp::make({3, 5, 2}, Activation::tanh);
  CHECK(m.param_count == 3 * 5 + 5 + 5 * 2 + 2);
  std::size_t expected_offset = 0;
  for (const Block& b : m.blocks) {
    CHECK(b.offset == expected_offset);
    expected_offset += b.size;
  }
  CHECK(expected_offset == m.param_count);
  CHECK(m.blocks[0].name == "layer0.weight");
  CHECK(m.blocks[3].name == "layer1.bias");

  // Deterministic init, biases zero.
  const ParamVector t1 = m.init_params(9);
  const ParamVector t2 = m.init_params(9);
  CHECK(std::memcmp(t1.data(), t2.data(), t1.size() * sizeof(double)) == 0);
  const Block& bias = m.blocks[1];
  for (std::size_t i = 0; i < bias.size; ++i) CHECK(t1[bias.offset + i] == 0.0);
}

TEST_CASE("forward loss on known cases") {
  // Zero parameters give uniform logits: loss = ln(classes).
  for (int classes : {2, 4}) {
    const Mlp m = Mlp::make({3, classes}, Activation::tanh);
    const Dataset d = tiny_balanced_dataset(12, 3, classes, 5);
    const ParamVector theta(m.param_count, 0.0);
    CHECK(forward_loss(m, d, theta) == doctest::Approx(std::log(classes)).epsilon(1e-12));
  }

  // A huge correct-class margin drives the loss toward zero.
  const Mlp m = Mlp::make({1, 2}, Activation::tanh);
  Dataset d;
  d.dim = 1;
  d.classes = 2;
  d.split = "train";
  d.inputs = {1.0};
  d.labels = {0};
  ParamVector theta(m.param_count, 0.0);
  theta[0] = 50.0;  // logit 0 <- 50*x
  theta[1] = -50.0; // logit 1 <- -50*x
  CHECK(forward_loss(m, d, theta) <= 1e-12);
}

TEST_CASE("output-layer bias gradient vanishes by symmetry") {
  const Mlp m = Mlp::make({2, 4, 2}, Activation::tanh);
  const Dataset d = tiny_balanced_dataset(10, 2, 2, 7);
  const ParamVector theta(m.param_count, 0.0); // zero weights: uniform softmax
  const ParamVector g = gradient(m, d, theta);
  const Block& out_bias = m.blocks.back();
  for (std::size_t i = 0; i < out_bias.size; ++i)
    CHECK(std::fabs(g[out_bias.offset + i]) <= 1e-15);
}

TEST_CASE("gradient matches central differences on 100 random models") {
  Rng rng(101);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d_in = 1 + static_cast<int>(rng.uniform_int(4));
    const int hidden = 2 + static_cast<int>(rng.uniform_int(6));
    const int classes = 2 + static_cast<int>(rng.uniform_int(3));
    const Activation act = (rng.next_u64() & 1u) ? Activation::tanh : Activation::relu;
    const Mlp m = Mlp::make({d_in, hidden, classes}, act);
    const Dataset data = tiny_balanced_dataset(8, d_in, classes, 1000 + trial);
    ParamVector theta = m.init_params(2000 + static_cast<std::uint64_t>(trial));
    for (double& v : theta) v += 0.1 * rng.normal(); // break bias zeros

    const ParamVector g = gradient(m, data, theta);
    for (int probe = 0; probe < 32; ++probe) {
      const std::size_t i = rng.uniform_int(m.param_count);
      const double fd = fd_gradient(m, data, theta, i, 1e-4);
      const double scale = std::max({1e-6, std::fabs(fd), std::fabs(g[i])});
      const double rel = std::fabs(g[i] - fd) / scale;
      worst_rel = std::max(worst_rel, rel);
    }
  }
  CHECK(worst_rel <= 1e-4);
}

TEST_CASE("quadratic objective: block hessian recovers principal submatrices") {
  // A is 4x4; blocks split coordinates {0,1} and {2,3}.
  SymMatrix a = SymMatrix::from_rows(4, {4.0, 1.0, 0.5, 0.0, 1.0, 3.0, 0.2, 0.1, 0.5, 0.2, 2.0,
                                         -0.3, 0.0, 0.1, -0.3, 1.5});
  std::vector<Block> blocks{{"first", 0, 2, 2, 1}, {"second", 2, 2, 2, 1}};
  const QuadraticObjective q(a, {0.0, 0.0, 0.0, 0.0}, 0.0, blocks);
  const ParamVector theta{0.3, -0.2, 0.5, 0.1};

  const SymMatrix h0 = block_hessian(q, theta, blocks[0]);
  const SymMatrix h1 = block_hessian(q, theta, blocks[1]);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(std::fabs(h0.at(i, j) - a.at(i, j)) <= 1e-6);
      CHECK(std::fabs(h1.at(i, j) - a.at(i + 2, j + 2)) <= 1e-6);
    }
}

TEST_CASE("one-parameter quadratic: L = (t-1)^2 has H = [[2]]") {
  SymMatrix a = SymMatrix::diagonal(std::vector<double>{2.0});
  // (t-1)^2 = 0.5*t*(2t) - 2t + 1
  const QuadraticObjective q(a, {-2.0}, 1.0, {{"all", 0, 1, 1, 1}});
  const SymMatrix h = block_hessian(q, {0.7}, q.blocks()[0]);
  CHECK(h.at(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("newton step solves a pure quadratic in one move") {
  SymMatrix a = SymMatrix::from_rows(2, {3.0, 0.5, 0.5, 1.5});
  const std::vector<double> b{-1.0, 0.5};
  const QuadraticObjective q(a, b, 0.0, {{"all", 0, 2, 2, 1}});
  ParamVector theta{2.0, -3.0};
  const ParamVector g = q.grad(theta);
  // Solve H d = g for the 2x2 system directly.
  const double det = a.at(0, 0) * a.at(1, 1) - a.at(0, 1) * a.at(1, 0);
  const double d0 = (g[0] * a.at(1, 1) - g[1] * a.at(0, 1)) / det;
  const double d1 = (a.at(0, 0) * g[1] - a.at(1, 0) * g[0]) / det;
  theta[0] -= d0;
  theta[1] -= d1;
  const ParamVector g_after = q.grad(theta);
  CHECK(std::fabs(g_after[0]) <= 1e-10);
  CHECK(std::fabs(g_after[1]) <= 1e-10);
}

TEST_CASE("hutchinson trace on identity and diagonal ground truth") {
  // H = I: every probe returns exactly the block size.
  SymMatrix id = SymMatrix::identity(6);
  const QuadraticObjective q(id, std::vector<double>(6, 0.0), 0.0, {{"all", 0, 6, 6, 1}});
  const TraceEstimate est = hutchinson_trace(q, ParamVector(6, 0.3), q.blocks()[0], 32, 5);
  CHECK(est.estimate == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(est.stderr_ <= 1e-6);

  SymMatrix d3 = SymMatrix::diagonal(std::vector<double>{1.0, 2.0, 3.0});
  const QuadraticObjective q3(d3, std::vector<double>(3, 0.0), 0.0, {{"all", 0, 3, 3, 1}});
  const TraceEstimate est3 = hutchinson_trace(q3, ParamVector(3, 0.0), q3.blocks()[0], 64, 6);
  CHECK(est3.estimate == doctest::Approx(6.0).epsilon(1e-6));

  CHECK_THROWS_AS(hutchinson_trace(q3, ParamVector(3, 0.0), q3.blocks()[0], 8, 1), Error);
}

TEST_CASE("hutchinson matches the exact block hessian trace on an mlp") {
  const Mlp m = Mlp::make({2, 6, 2}, Activation::tanh);
  const Dataset data = tiny_balanced_dataset(16, 2, 2, 99);
  const ParamVector theta = m.init_params(42);
  const MlpObjective obj(m, data);
  const Block& block = m.blocks[0];
  const double exact = trace(block_hessian(obj, theta, block));

  int within = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const TraceEstimate est =
        hutchinson_trace(obj, theta, block, 64, 7000 + static_cast<std::uint64_t>(rep));
    const double slack = 3.0 * est.stderr_ + 1e-7; // FD noise floor on top of 3 sigma
    if (std::fabs(est.estimate - exact) <= slack) ++within;
  }
  CHECK(within >= 99);
}

TEST_CASE("synthetic datasets are deterministic, balanced, split 80/20") {
  for (const char* kind : {"two_gaussians", "rings", "grid_digits"}) {
    const DatasetPair a = make_synthetic_dataset(kind, 100, 7);
    const DatasetPair b = make_synthetic_dataset(kind, 100, 7);
    CHECK(a.train.inputs == b.train.inputs);
    CHECK(a.test.inputs == b.test.inputs);
    CHECK(a.train.labels == b.train.labels);
    CHECK(a.train.size() + a.test.size() == 100);
    CHECK(a.train.split == "train");
    CHECK(a.test.split == "test");

    std::vector<int> counts(static_cast<std::size_t>(a.train.classes), 0);
    for (int l : a.train.labels) ++counts[static_cast<std::size_t>(l)];
    for (int l : a.test.labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 1; c < counts.size(); ++c)
      CHECK(std::abs(counts[c] - counts[0]) <= 1);
  }
  const DatasetPair g = make_synthetic_dataset("two_gaussians", 100, 7);
  CHECK(g.train.size() == 80);
  CHECK(g.test.size() == 20);
  CHECK_THROWS_AS(make_synthetic_dataset("nope", 100, 7), Error);
  CHECK_THROWS_AS(make_synthetic_dataset("rings", 4, 7), Error);
}

TEST_CASE("two_gaussians is linearly separable at the bayes level") {
  // The sign of x0 is a linear probe; with 4-sigma separation its error is
  // Phi(-2), about 2.3%, so accuracy must clear 95%.
  const DatasetPair p = make_synthetic_dataset("two_gaussians", 500, 3);
  std::size_t hits = 0, total = 0;
  for (const Dataset* d : {&p.train, &p.test}) {
    for (std::size_t i = 0; i < d->size(); ++i) {
      const int pred = d->example(i)[0] >= 0.0 ? 1 : 0;
      hits += (pred == d->labels[i]);
      ++total;
    }
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("dataset csv roundtrip") {
  const DatasetPair p = make_synthetic_dataset("two_gaussians", 40, 11);
  const std::string path = (std::filesystem::temp_directory_path() / "hlens_ds.csv").string();
  save_dataset_csv(p.train, path);
  const Dataset back = load_dataset_csv(path, "train");
  CHECK(back.dim == p.train.dim);
  CHECK(back.labels == p.train.labels);
  REQUIRE(back.inputs.size() == p.train.inputs.size());
  for (std::size_t i = 0; i < back.inputs.size(); ++i)
    CHECK(back.inputs[i] == p.train.inputs[i]); // %.17g round-trips exactly
  std::filesystem::remove(path);
}

TEST_CASE("block hessians inherit symmetry and reconstruction") {
  const Mlp m = Mlp::make({2, 4, 2}, Activation::tanh);
  const Dataset data = tiny_balanced_dataset(12, 2, 2, 55);
  const ParamVector theta = m.init_params(77);
  const MlpObjective obj(m, data);
  for (const Block& b : m.blocks) {
    const SymMatrix h = block_hessian(obj, theta, b);
    CHECK(h.n == static_cast<int>(b.size));
    h.validate(); // symmetric by construction
    CHECK_NOTHROW(jacobi_eigendecompose(h));
  }
}

TEST_CASE("block too large raises") {
  const Mlp m = Mlp::make({2, 4, 2}, Activation::tanh);
  const Dataset data = tiny_balanced_dataset(8, 2, 2, 5);
  const MlpObjective obj(m, data);
  Block big{"big", 0, 3000, 3000, 1};
  try {
    block_hessian(obj, m.init_params(1), big);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::BlockTooLarge);
  }
}
