#include "hlens/model.hpp"

#include "hlens/entropy.hpp"
#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"
#include "hlens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace hlens {

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  raise(Err::InvalidKind, "unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Mlp Mlp::make(std::vector<int> layer_sizes, Activation act) {
  if (layer_sizes.size() < 2) raise(Err::InvalidConfig, "need at least input and output layers");
  for (int s : layer_sizes)
    if (s < 1) raise(Err::InvalidConfig, "layer sizes must be positive");

  Mlp m;
  m.layer_sizes = std::move(layer_sizes);
  m.act = act;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<std::size_t>(m.layer_sizes[l]);
    const auto fan_out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
    m.blocks.push_back({"layer" + std::to_string(l) + ".weight", offset, fan_in * fan_out, fan_out,
                        fan_in});
    offset += fan_in * fan_out;
    m.blocks.push_back({"layer" + std::to_string(l) + ".bias", offset, fan_out, fan_out, 1});
    offset += fan_out;
  }
  m.param_count = offset;
  return m;
}

ParamVector Mlp::init_params(std::uint64_t seed) const {
  Rng rng(seed);
  ParamVector theta(param_count, 0.0);
  for (const Block& b : blocks) {
    if (b.cols == 1) continue; // biases start at zero
    const double scale = 1.0 / std::sqrt(static_cast<double>(b.cols));
    for (std::size_t i = 0; i < b.size; ++i) theta[b.offset + i] = scale * rng.normal();
  }
  return theta;
}

void Dataset::validate() const {
  if (labels.empty() || dim < 1) raise(Err::InvalidKind, "dataset must be non-empty");
  if (inputs.size() != labels.size() * static_cast<std::size_t>(dim))
    raise(Err::ShapeError, "input row count does not match labels");
  for (double v : inputs)
    if (!std::isfinite(v)) raise(Err::InvalidKind, "non-finite dataset input");
  for (int l : labels)
    if (l < 0 || l >= classes) raise(Err::InvalidKind, "label out of range");
}

namespace {

struct RawExample {
  std::vector<double> x;
  int label;
};

void fill_dataset(Dataset& d, const std::vector<RawExample>& rows, int dim, int classes,
                  const char* split) {
  d.dim = dim;
  d.classes = classes;
  d.split = split;
  d.inputs.reserve(rows.size() * static_cast<std::size_t>(dim));
  d.labels.reserve(rows.size());
  for (const auto& r : rows) {
    d.inputs.insert(d.inputs.end(), r.x.begin(), r.x.end());
    d.labels.push_back(r.label);
  }
}

} // namespace

DatasetPair make_synthetic_dataset(const std::string& kind, int m, std::uint64_t seed) {
  if (m < 8) raise(Err::InvalidKind, "dataset size must be >= 8");

  int dim = 2;
  int classes = 2;
  std::vector<std::vector<double>> prototypes;
  if (kind == "two_gaussians") {
    // Centers 4 sigma apart on the x axis (sigma = 1): Bayes error Phi(-2).
  } else if (kind == "rings") {
    // Concentric circles, radii 1 and 2, radial noise 0.1.
  } else if (kind == "grid_digits") {
    dim = 16;
    classes = 10;
    // Fixed +-1 prototype patterns, independent of the user seed.
    Rng proto_rng(0x9d171757c0ffeeULL);
    for (int c = 0; c < classes; ++c) {
      std::vector<double> p(static_cast<std::size_t>(dim));
      for (double& v : p) v = proto_rng.rademacher();
      prototypes.push_back(std::move(p));
    }
  } else {
    raise(Err::InvalidKind, "unknown dataset kind '" + kind + "'");
  }

  Rng rng(seed);
  std::vector<RawExample> train_rows, test_rows;
  for (int c = 0; c < classes; ++c) {
    const int m_c = m / classes + (c < m % classes ? 1 : 0);
    const int train_c = (m_c * 4) / 5;
    for (int j = 0; j < m_c; ++j) {
      RawExample ex;
      ex.label = c;
      ex.x.resize(static_cast<std::size_t>(dim));
      if (kind == "two_gaussians") {
        const double cx = (c == 0) ? -2.0 : 2.0;
        ex.x[0] = cx + rng.normal();
        ex.x[1] = rng.normal();
      } else if (kind == "rings") {
        const double radius = (c == 0) ? 1.0 : 2.0;
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const double r = radius + 0.1 * rng.normal();
        ex.x[0] = r * std::cos(angle);
        ex.x[1] = r * std::sin(angle);
      } else {
        for (int k = 0; k < dim; ++k)
          ex.x[static_cast<std::size_t>(k)] =
              prototypes[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] +
              0.3 * rng.normal();
      }
      (j < train_c ? train_rows : test_rows).push_back(std::move(ex));
    }
  }

  DatasetPair pair;
  fill_dataset(pair.train, train_rows, dim, classes, "train");
  fill_dataset(pair.test, test_rows, dim, classes, "test");
  pair.train.validate();
  pair.test.validate();
  return pair;
}

void save_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Err::InvalidKind, "cannot open '" + path + "' for writing");
  for (int k = 0; k < d.dim; ++k) out << "x" << k << ",";
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int k = 0; k < d.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", d.example(i)[k]);
      out << buf << ",";
    }
    out << d.labels[i] << "\n";
  }
}

Dataset load_dataset_csv(const std::string& path, const std::string& split) {
  std::ifstream in(path);
  if (!in) raise(Err::InvalidKind, "cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) raise(Err::InvalidKind, "empty dataset file '" + path + "'");

  int dim = 0;
  {
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) {
      if (col == "label") break;
      if (col != "x" + std::to_string(dim))
        raise(Err::InvalidKind, "unexpected CSV column '" + col + "'");
      ++dim;
    }
  }
  if (dim < 1) raise(Err::InvalidKind, "dataset CSV has no feature columns");

  Dataset d;
  d.dim = dim;
  d.split = split;
  int max_label = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    for (int k = 0; k < dim; ++k) {
      if (!std::getline(row, cell, ','))
        raise(Err::InvalidKind, "short CSV row in '" + path + "'");
      d.inputs.push_back(std::stod(cell));
    }
    if (!std::getline(row, cell, ',')) raise(Err::InvalidKind, "missing label in '" + path + "'");
    const int label = std::stoi(cell);
    max_label = std::max(max_label, label);
    d.labels.push_back(label);
  }
  d.classes = max_label + 1;
  d.validate();
  return d;
}

namespace {

/// Per-call scratch for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> acts;   // acts[l], l = 0..L
  std::vector<std::vector<double>> deltas; // deltas[l], l = 1..L
};

Workspace make_workspace(const Mlp& model) {
  Workspace w;
  w.acts.resize(model.layer_sizes.size());
  w.deltas.resize(model.layer_sizes.size());
  for (std::size_t l = 0; l < model.layer_sizes.size(); ++l) {
    w.acts[l].resize(static_cast<std::size_t>(model.layer_sizes[l]));
    w.deltas[l].resize(static_cast<std::size_t>(model.layer_sizes[l]));
  }
  return w;
}

const Block& weight_block(const Mlp& model, std::size_t l) { return model.blocks[2 * l]; }
const Block& bias_block(const Mlp& model, std::size_t l) { return model.blocks[2 * l + 1]; }

/// Runs the network on one example; leaves logits in w.acts.back().
void forward_example(const Mlp& model, const ParamVector& theta, const double* x, Workspace& w) {
  const std::size_t layers = model.layer_sizes.size() - 1;
  std::copy(x, x + model.input_dim(), w.acts[0].begin());
  for (std::size_t l = 0; l < layers; ++l) {
    const Block& wb = weight_block(model, l);
    const Block& bb = bias_block(model, l);
    const auto& in = w.acts[l];
    auto& out = w.acts[l + 1];
    for (std::size_t i = 0; i < wb.rows; ++i) {
      const double* row = theta.data() + wb.offset + i * wb.cols;
      out[i] = kernels::dot({row, wb.cols}, in) + theta[bb.offset + i];
    }
    if (l + 1 < layers) {
      if (model.act == Activation::tanh)
        for (double& v : out) v = std::tanh(v);
      else
        for (double& v : out) v = (v > 0.0) ? v : 0.0;
    }
  }
}

/// Cross-entropy of the logits in w.acts.back() against label, plus the
/// softmax-minus-onehot residual written into delta.
double softmax_loss(const std::vector<double>& logits, int label, std::vector<double>& delta) {
  double zmax = logits[0];
  for (double v : logits) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    delta[k] = std::exp(logits[k] - zmax);
    sum += delta[k];
  }
  for (double& v : delta) v /= sum;
  const double loss = std::log(sum) + zmax - logits[static_cast<std::size_t>(label)];
  delta[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

void check_model_inputs(const Mlp& model, const Dataset& data, const ParamVector& theta) {
  if (theta.size() != model.param_count)
    raise(Err::ShapeError, "parameter vector does not match the model");
  if (data.dim != model.input_dim() || data.classes != model.output_dim())
    raise(Err::ShapeError, "dataset shape does not match the model");
}

} // namespace

double forward_loss(const Mlp& model, const Dataset& data, const ParamVector& theta) {
  check_model_inputs(model, data, theta);
  Workspace w = make_workspace(model);
  std::vector<double> delta(static_cast<std::size_t>(model.output_dim()));
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward_example(model, theta, data.example(i), w);
    total += softmax_loss(w.acts.back(), data.labels[i], delta);
  }
  const double loss = total / static_cast<double>(data.size());
  if (!std::isfinite(loss)) raise(Err::NumericalOverflow, "non-finite loss");
  return loss;
}

double gradient_with_loss(const Mlp& model, const Dataset& data, const ParamVector& theta,
                          ParamVector& grad_out) {
  check_model_inputs(model, data, theta);
  const std::size_t layers = model.layer_sizes.size() - 1;
  Workspace w = make_workspace(model);
  grad_out.assign(model.param_count, 0.0);

  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward_example(model, theta, data.example(i), w);
    total += softmax_loss(w.acts.back(), data.labels[i], w.deltas[layers]);

    for (std::size_t l = layers; l-- > 0;) {
      const Block& wb = weight_block(model, l);
      const Block& bb = bias_block(model, l);
      const auto& delta = w.deltas[l + 1];
      const auto& in = w.acts[l];

      for (std::size_t r = 0; r < wb.rows; ++r) {
        double* grow = grad_out.data() + wb.offset + r * wb.cols;
        kernels::axpy(delta[r], in, {grow, wb.cols});
        grad_out[bb.offset + r] += delta[r];
      }

      if (l > 0) {
        auto& back = w.deltas[l];
        std::fill(back.begin(), back.end(), 0.0);
        for (std::size_t r = 0; r < wb.rows; ++r) {
          const double* row = theta.data() + wb.offset + r * wb.cols;
          kernels::axpy(delta[r], {row, wb.cols}, back);
        }
        const auto& a = w.acts[l];
        if (model.act == Activation::tanh)
          for (std::size_t j = 0; j < back.size(); ++j) back[j] *= 1.0 - a[j] * a[j];
        else
          for (std::size_t j = 0; j < back.size(); ++j) back[j] *= (a[j] > 0.0) ? 1.0 : 0.0;
      }
    }
  }

  const double inv_m = 1.0 / static_cast<double>(data.size());
  for (double& g : grad_out) g *= inv_m;
  const double loss = total * inv_m;
  if (!std::isfinite(loss)) raise(Err::NumericalOverflow, "non-finite loss");
  return loss;
}

ParamVector gradient(const Mlp& model, const Dataset& data, const ParamVector& theta) {
  ParamVector g;
  gradient_with_loss(model, data, theta, g);
  return g;
}

double accuracy(const Mlp& model, const Dataset& data, const ParamVector& theta) {
  check_model_inputs(model, data, theta);
  Workspace w = make_workspace(model);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward_example(model, theta, data.example(i), w);
    const auto& logits = w.acts.back();
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
      if (logits[k] > logits[best]) best = k;
    if (static_cast<int>(best) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

QuadraticObjective::QuadraticObjective(SymMatrix A, std::vector<double> b, double c,
                                       std::vector<Block> blocks)
    : A_(std::move(A)), b_(std::move(b)), c_(c), blocks_(std::move(blocks)) {
  A_.validate();
  if (b_.size() != static_cast<std::size_t>(A_.n))
    raise(Err::ShapeError, "linear term does not match dimension");
}

double QuadraticObjective::loss(const ParamVector& theta) const {
  const int n = A_.n;
  double quad = 0.0;
  for (int i = 0; i < n; ++i)
    quad += theta[static_cast<std::size_t>(i)] *
            kernels::dot({A_.row(i), static_cast<std::size_t>(n)}, theta);
  return 0.5 * quad + kernels::dot(b_, theta) + c_;
}

ParamVector QuadraticObjective::grad(const ParamVector& theta) const {
  const int n = A_.n;
  ParamVector g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] =
        kernels::dot({A_.row(i), static_cast<std::size_t>(n)}, theta) +
        b_[static_cast<std::size_t>(i)];
  return g;
}

SymMatrix block_hessian(const DiffModel& model, const ParamVector& theta, const Block& block) {
  if (block.size > 2048)
    raise(Err::BlockTooLarge,
          "block '" + block.name + "' exceeds 2048 parameters; use hutchinson_trace");
  if (block.offset + block.size > theta.size())
    raise(Err::ShapeError, "block does not fit the parameter vector");

  const int n = static_cast<int>(block.size);
  SymMatrix H = SymMatrix::zero(n);
  ParamVector probe = theta;
  for (int j = 0; j < n; ++j) {
    const std::size_t idx = block.offset + static_cast<std::size_t>(j);
    const double h = 1e-4 * (1.0 + std::fabs(theta[idx]));
    probe[idx] = theta[idx] + h;
    const ParamVector gp = model.grad(probe);
    probe[idx] = theta[idx] - h;
    const ParamVector gm = model.grad(probe);
    probe[idx] = theta[idx];
    for (int i = 0; i < n; ++i) {
      const std::size_t row = block.offset + static_cast<std::size_t>(i);
      H.at(i, j) = (gp[row] - gm[row]) / (2.0 * h);
    }
  }
  // Central differences are symmetric only to truncation error; enforce it.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (H.at(i, j) + H.at(j, i));
      H.at(i, j) = v;
      H.at(j, i) = v;
    }
  return H;
}

TraceEstimate hutchinson_trace(const DiffModel& model, const ParamVector& theta,
                               const Block& block, int probes, std::uint64_t seed) {
  if (probes < 16) raise(Err::InsufficientData, "hutchinson_trace needs probes >= 16");
  if (block.offset + block.size > theta.size())
    raise(Err::ShapeError, "block does not fit the parameter vector");

  const double h = 1e-4;
  std::vector<double> samples(static_cast<std::size_t>(probes), 0.0);
  ParamVector probe(theta.size());
  std::vector<double> v(block.size);
  for (int p = 0; p < probes; ++p) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(p));
    for (double& vi : v) vi = rng.rademacher();

    probe = theta;
    for (std::size_t i = 0; i < block.size; ++i) probe[block.offset + i] += h * v[i];
    const ParamVector gp = model.grad(probe);
    probe = theta;
    for (std::size_t i = 0; i < block.size; ++i) probe[block.offset + i] -= h * v[i];
    const ParamVector gm = model.grad(probe);

    double quad = 0.0;
    for (std::size_t i = 0; i < block.size; ++i)
      quad += v[i] * (gp[block.offset + i] - gm[block.offset + i]) / (2.0 * h);
    samples[static_cast<std::size_t>(p)] = quad;
  }

  const double mean = kernels::sum(samples) / static_cast<double>(probes);
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(probes - 1);
  return TraceEstimate{mean, std::sqrt(var / static_cast<double>(probes)),
                       probes};
}

BlockHessianSet compute_block_hessians(const DiffModel& model, const ParamVector& theta) {
  BlockHessianSet out;
  out.reserve(model.blocks().size());
  for (const Block& b : model.blocks()) {
    BlockHessian bh;
    bh.name = b.name;
    bh.matrix = block_hessian(model, theta, b);
    bh.trace = trace(bh.matrix);
    const SpectralDecomposition spec = jacobi_eigendecompose(bh.matrix);
    try {
      const ProbabilityVector density = spectrum_to_distribution(spec.eigenvalues);
      bh.entropy = shannon_entropy(density);
      bh.gap = std::log(static_cast<double>(bh.matrix.n)) - bh.entropy;
    } catch (const Error& e) {
      if (e.code() != Err::DegenerateSpectrum) throw;
      bh.degenerate = true;
    }
    out.push_back(std::move(bh));
  }
  return out;
}

} // namespace hlens
