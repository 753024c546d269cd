#include "hlens/diagnostics.hpp"

#include "hlens/entropy.hpp"
#include "hlens/errors.hpp"
#include "hlens/kernels.hpp"
#include "hlens/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace hlens {

namespace {

std::string fmt_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr double kDivergenceLossLimit = 1e6;

} // namespace

double positive_trace_ratio(const BlockHessianSet& blocks) {
  if (blocks.empty()) raise(Err::InsufficientBlocks, "need at least one block");
  std::size_t positive = 0;
  for (const auto& b : blocks)
    if (b.trace > 0.0) ++positive;
  return static_cast<double>(positive) / static_cast<double>(blocks.size());
}

double total_abs_trace(const BlockHessianSet& blocks) {
  if (blocks.empty()) raise(Err::InsufficientBlocks, "need at least one block");
  double s = 0.0;
  for (const auto& b : blocks) s += std::fabs(b.trace);
  return s;
}

double mean_entropy_gap(const BlockHessianSet& blocks, std::vector<std::string>* excluded) {
  if (blocks.empty()) raise(Err::InsufficientBlocks, "need at least one block");
  double s = 0.0;
  std::size_t used = 0;
  for (const auto& b : blocks) {
    if (b.degenerate) {
      if (excluded) excluded->push_back(b.name);
      continue;
    }
    s += b.gap;
    ++used;
  }
  if (used == 0) raise(Err::DegenerateSpectrum, "every block has a degenerate spectrum");
  return s / static_cast<double>(used);
}

double entropy_deviation(const BlockHessianSet& blocks) {
  std::vector<double> entropies;
  for (const auto& b : blocks)
    if (!b.degenerate) entropies.push_back(b.entropy);
  if (entropies.size() < 2)
    raise(Err::InsufficientBlocks, "entropy deviation needs >= 2 usable blocks");
  const double n = static_cast<double>(entropies.size());
  const double mean = kernels::sum(entropies) / n;
  double var = 0.0;
  for (double e : entropies) var += (e - mean) * (e - mean);
  return std::sqrt(var / n);
}

SplitHessianStats summarize_block_hessians(const BlockHessianSet& blocks) {
  SplitHessianStats out;
  for (const auto& b : blocks)
    out.blocks.push_back({b.name, b.trace, b.entropy, b.gap, b.degenerate});
  out.pos_trace_ratio = positive_trace_ratio(blocks);
  out.total_abs_trace = total_abs_trace(blocks);
  out.mean_entropy_gap = mean_entropy_gap(blocks, &out.excluded);
  out.entropy_deviation = entropy_deviation(blocks);
  return out;
}

namespace {

long checkpoint_step(double fraction, long total) {
  if (fraction == 0.0) return 0;
  if (fraction == 0.01) return std::min<long>(total, std::max<long>(1, std::lround(0.01 * total)));
  return std::lround(fraction * static_cast<double>(total));
}

CheckpointRecord measure_checkpoint(const Mlp& model, const DatasetPair& data,
                                    const ParamVector& theta, double fraction, long step) {
  CheckpointRecord rec;
  rec.fraction = fraction;
  rec.step = step;
  rec.train_loss = forward_loss(model, data.train, theta);
  rec.test_accuracy = accuracy(model, data.test, theta);
  const MlpObjective train_obj(model, data.train);
  const MlpObjective test_obj(model, data.test);
  rec.train_hessian = summarize_block_hessians(compute_block_hessians(train_obj, theta));
  rec.test_hessian = summarize_block_hessians(compute_block_hessians(test_obj, theta));
  return rec;
}

} // namespace

TrainingTrace run_training(const ExperimentConfig& config) {
  config.validate();
  const DatasetPair data =
      config.dataset_kind == "csv"
          ? DatasetPair{load_dataset_csv(config.dataset_path, "train"),
                        load_dataset_csv(config.dataset_path, "test")}
          : make_synthetic_dataset(config.dataset_kind, config.dataset_size, config.dataset_seed);
  const Mlp model = Mlp::make(config.layers, config.activation);
  ParamVector theta = model.init_params(config.run_seed);
  OptimizerSpec spec = config.optimizer;
  spec.total_steps = std::max<long>(config.steps, 1);
  Optimizer opt(spec, theta.size());

  // fraction index -> target step; several fractions may share a step.
  const long total = config.steps;
  std::array<long, 6> targets{};
  for (std::size_t i = 0; i < kCheckpointFractions.size(); ++i)
    targets[i] = checkpoint_step(kCheckpointFractions[i], total);

  TrainingTrace trace;
  trace.run_id = config.run_id.empty() ? config.digest() : config.run_id;
  trace.config_digest = config.digest();

  std::map<long, CheckpointRecord> measured;
  ParamVector grad(theta.size());
  for (long t = 0; t <= total; ++t) {
    const bool is_target =
        std::find(targets.begin(), targets.end(), t) != targets.end();
    if (is_target && !measured.count(t)) {
      try {
        measured.emplace(t, measure_checkpoint(model, data, theta, 0.0, t));
      } catch (const Error&) {
        trace.diverged = true;
        trace.diverged_at_step = t;
        break;
      }
    }
    if (t == total) break;

    double loss = 0.0;
    try {
      loss = gradient_with_loss(model, data.train, theta, grad);
      if (!(loss <= kDivergenceLossLimit)) {
        trace.diverged = true;
        trace.diverged_at_step = t;
        break;
      }
      opt.step(theta, grad);
    } catch (const Error& e) {
      if (e.code() != Err::NumericalOverflow && e.code() != Err::NonFiniteGradient) throw;
      trace.diverged = true;
      trace.diverged_at_step = t;
      break;
    }
  }

  // Assemble the six slots; unmeasured ones repeat the last valid record.
  const CheckpointRecord* last = nullptr;
  for (std::size_t i = 0; i < kCheckpointFractions.size(); ++i) {
    CheckpointRecord rec;
    auto it = measured.find(targets[i]);
    if (it != measured.end()) {
      rec = it->second;
      rec.carried = false;
      last = &it->second;
    } else {
      if (!last)
        raise(Err::NumericalOverflow, "run diverged before the first checkpoint was measured");
      rec = *last;
      rec.carried = true;
    }
    rec.fraction = kCheckpointFractions[i];
    rec.step = targets[i];
    trace.checkpoints.push_back(std::move(rec));
  }
  return trace;
}

namespace {

nlohmann::json split_stats_json(const SplitHessianStats& s) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : s.blocks) {
    nlohmann::json jb{{"name", b.name}, {"trace", b.trace}, {"degenerate", b.degenerate}};
    if (!b.degenerate) {
      jb["entropy"] = b.entropy;
      jb["gap"] = b.gap;
    }
    blocks.push_back(std::move(jb));
  }
  return nlohmann::json{
      {"per_block", std::move(blocks)},
      {"pos_trace_ratio", s.pos_trace_ratio},
      {"total_abs_trace", s.total_abs_trace},
      {"mean_entropy_gap", s.mean_entropy_gap},
      {"entropy_deviation", s.entropy_deviation},
      {"excluded_blocks", s.excluded},
  };
}

nlohmann::json config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  std::istringstream in(config.canonical());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

} // namespace

std::string trace_json(const TrainingTrace& trace, const ExperimentConfig& config) {
  nlohmann::json j;
  j["run_id"] = trace.run_id;
  j["config_digest"] = trace.config_digest;
  j["config"] = config_json(config);
  j["diverged"] = trace.diverged;
  if (trace.diverged) j["diverged_at_step"] = trace.diverged_at_step;
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& rec : trace.checkpoints) {
    cps.push_back(nlohmann::json{
        {"fraction", rec.fraction},
        {"step", rec.step},
        {"train_loss", rec.train_loss},
        {"test_accuracy", rec.test_accuracy},
        {"train_hessian", split_stats_json(rec.train_hessian)},
        {"test_hessian", split_stats_json(rec.test_hessian)},
        {"pos_trace_ratio", rec.train_hessian.pos_trace_ratio},
        {"total_abs_trace", rec.train_hessian.total_abs_trace},
        {"mean_entropy_gap", rec.test_hessian.mean_entropy_gap},
        {"entropy_deviation", rec.test_hessian.entropy_deviation},
        {"carried", rec.carried},
    });
  }
  j["checkpoints"] = std::move(cps);
  return j.dump(2) + "\n";
}

std::string trace_csv(const TrainingTrace& trace) {
  std::string out = "run_id,fraction,step,test_accuracy,pos_trace_ratio,total_abs_trace,"
                    "mean_entropy_gap,entropy_deviation,train_loss\n";
  for (const auto& rec : trace.checkpoints) {
    out += trace.run_id;
    out += "," + fmt_g6(rec.fraction);
    out += "," + std::to_string(rec.step);
    out += "," + fmt_g6(rec.test_accuracy);
    out += "," + fmt_g6(rec.train_hessian.pos_trace_ratio);
    out += "," + fmt_g6(rec.train_hessian.total_abs_trace);
    out += "," + fmt_g6(rec.test_hessian.mean_entropy_gap);
    out += "," + fmt_g6(rec.test_hessian.entropy_deviation);
    out += "," + fmt_g6(rec.train_loss);
    out += "\n";
  }
  return out;
}

std::string sweep_summary_csv(const std::vector<std::pair<std::string, TrainingTrace>>& runs) {
  std::vector<std::pair<std::string, TrainingTrace>> sorted = runs;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  struct MetricDef {
    const char* name;
    double (*get)(const CheckpointRecord&);
  };
  static const MetricDef metrics[] = {
      {"test_accuracy", [](const CheckpointRecord& r) { return r.test_accuracy; }},
      {"pos_trace_ratio", [](const CheckpointRecord& r) { return r.train_hessian.pos_trace_ratio; }},
      {"total_abs_trace", [](const CheckpointRecord& r) { return r.train_hessian.total_abs_trace; }},
      {"mean_entropy_gap", [](const CheckpointRecord& r) { return r.test_hessian.mean_entropy_gap; }},
      {"entropy_deviation",
       [](const CheckpointRecord& r) { return r.test_hessian.entropy_deviation; }},
  };

  std::string out = "metric,config,pct_0,pct_1,pct_25,pct_50,pct_75,pct_100,diverged\n";
  for (const auto& m : metrics) {
    for (const auto& [name, trace] : sorted) {
      out += m.name;
      out += "," + name;
      for (const auto& rec : trace.checkpoints) out += "," + fmt_g6(m.get(rec));
      out += trace.diverged ? ",yes" : ",no";
      out += "\n";
    }
  }
  return out;
}

SaddleReport saddle_escape_experiment(std::span<const double> spectrum,
                                      const OptimizerSpec& optimizer, long steps,
                                      std::uint64_t seed) {
  if (spectrum.empty()) raise(Err::NoEscapeDirections, "empty spectrum");
  int escapes = 0;
  for (double lam : spectrum)
    if (lam < 0.0) ++escapes;
  if (escapes == 0) raise(Err::NoEscapeDirections, "no negative eigenvalues to escape along");

  const std::size_t n = spectrum.size();
  Rng rng(seed);
  ParamVector theta(n);
  for (double& v : theta) v = rng.normal();
  const double norm = std::sqrt(kernels::sq_sum(theta));
  for (double& v : theta) v *= 1e-3 / norm;
  const ParamVector start = theta;

  Optimizer opt(optimizer, n);
  ParamVector grad(n);
  for (long t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = spectrum[i] * theta[i];
    opt.step(theta, grad);
  }

  SaddleReport rep;
  rep.lambdas.assign(spectrum.begin(), spectrum.end());
  rep.escape_directions = escapes;
  rep.displacement_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = theta[i] - start[i];
    rep.displacement_sq[i] = d * d;
  }

  if (escapes >= 2) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      if (spectrum[i] >= 0.0) continue;
      xs.push_back(std::log(std::fabs(spectrum[i])));
      ys.push_back(std::log(rep.displacement_sq[i]));
    }
    const double m = static_cast<double>(xs.size());
    const double mx = kernels::sum(xs) / m;
    const double my = kernels::sum(ys) / m;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    rep.log_correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  }
  return rep;
}

} // namespace hlens
