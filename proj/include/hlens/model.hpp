#ifndef HLENS_MODEL_HPP
#define HLENS_MODEL_HPP

#include "hlens/optim.hpp"
#include "hlens/symmat.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hlens {

enum class Activation { tanh, relu };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

/// One named parameter tensor: a weight matrix (rows x cols) or a bias
/// vector (rows x 1). Blocks partition the flat parameter vector exactly.
struct Block {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Fully connected network with tanh or relu hidden activations and linear
/// output logits. Parameters live in one flat vector; the block table names
/// each weight matrix and bias vector.
struct Mlp {
  std::vector<int> layer_sizes; // [d_in, h1, ..., d_out]
  Activation act = Activation::tanh;
  std::vector<Block> blocks;
  std::size_t param_count = 0;

  static Mlp make(std::vector<int> layer_sizes, Activation act);

  /// Deterministic init: weights N(0, 1/fan_in), biases 0.
  ParamVector init_params(std::uint64_t seed) const;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

struct Dataset {
  std::vector<double> inputs; // m x dim, row-major
  std::vector<int> labels;    // in [0, classes)
  int dim = 0;
  int classes = 0;
  std::string split; // "train" or "test"

  std::size_t size() const { return labels.size(); }
  const double* example(std::size_t i) const { return inputs.data() + i * dim; }
  void validate() const;
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

/// Deterministic synthetic datasets, balanced classes, fixed 80/20 split.
/// Kinds: two_gaussians (2 classes, 4-sigma separation), rings (2 classes),
/// grid_digits (10 classes of noisy 4x4 prototypes).
DatasetPair make_synthetic_dataset(const std::string& kind, int m, std::uint64_t seed);

/// CSV with header x0,...,x{d-1},label.
void save_dataset_csv(const Dataset& d, const std::string& path);
Dataset load_dataset_csv(const std::string& path, const std::string& split);

/// Mean cross-entropy over the dataset, in nats.
double forward_loss(const Mlp& model, const Dataset& data, const ParamVector& theta);

/// Exact reverse-mode gradient of forward_loss.
ParamVector gradient(const Mlp& model, const Dataset& data, const ParamVector& theta);

/// Loss and gradient from one pass; used by the training loop.
double gradient_with_loss(const Mlp& model, const Dataset& data, const ParamVector& theta,
                          ParamVector& grad_out);

/// Fraction of examples whose argmax logit matches the label.
double accuracy(const Mlp& model, const Dataset& data, const ParamVector& theta);

/// Differentiable scalar objective over a flat parameter vector, with a
/// block table; the Hessian probes below work on this interface.
class DiffModel {
public:
  virtual ~DiffModel() = default;
  virtual std::size_t dim() const = 0;
  virtual double loss(const ParamVector& theta) const = 0;
  virtual ParamVector grad(const ParamVector& theta) const = 0;
  virtual const std::vector<Block>& blocks() const = 0;
};

/// Mlp + dataset bound as a DiffModel.
class MlpObjective : public DiffModel {
public:
  MlpObjective(const Mlp& model, const Dataset& data) : model_(model), data_(data) {}
  std::size_t dim() const override { return model_.param_count; }
  double loss(const ParamVector& theta) const override { return forward_loss(model_, data_, theta); }
  ParamVector grad(const ParamVector& theta) const override {
    return gradient(model_, data_, theta);
  }
  const std::vector<Block>& blocks() const override { return model_.blocks; }

private:
  const Mlp& model_;
  const Dataset& data_;
};

/// L(theta) = 0.5 theta'A theta + b'theta + c with an explicit block table;
/// ground truth for the Hessian probes.
class QuadraticObjective : public DiffModel {
public:
  QuadraticObjective(SymMatrix A, std::vector<double> b, double c, std::vector<Block> blocks);
  std::size_t dim() const override { return static_cast<std::size_t>(A_.n); }
  double loss(const ParamVector& theta) const override;
  ParamVector grad(const ParamVector& theta) const override;
  const std::vector<Block>& blocks() const override { return blocks_; }
  const SymMatrix& matrix() const { return A_; }

private:
  SymMatrix A_;
  std::vector<double> b_;
  double c_;
  std::vector<Block> blocks_;
};

/// Exact block Hessian by central differences of the gradient, step
/// 1e-4*(1+|theta_j|) per column, symmetrized. Blocks above 2048 parameters
/// raise Error(BlockTooLarge); use hutchinson_trace for those.
SymMatrix block_hessian(const DiffModel& model, const ParamVector& theta, const Block& block);

struct TraceEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  int probes = 0;
};

/// Hutchinson trace estimate over one block: mean of v'Hv with Rademacher
/// probes, Hv by central differences of the gradient.
TraceEstimate hutchinson_trace(const DiffModel& model, const ParamVector& theta,
                               const Block& block, int probes, std::uint64_t seed);

/// One block's Hessian with its scalar statistics. `entropy` and `gap` use
/// the absolute-eigenvalue spectral density; all-zero spectra are flagged
/// degenerate instead.
struct BlockHessian {
  std::string name;
  SymMatrix matrix;
  double trace = 0.0;
  double entropy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
};

using BlockHessianSet = std::vector<BlockHessian>;

/// Exact Hessians for every block of the model, in block-table order.
BlockHessianSet compute_block_hessians(const DiffModel& model, const ParamVector& theta);

} // namespace hlens

#endif
