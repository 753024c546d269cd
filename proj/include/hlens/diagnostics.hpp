#ifndef HLENS_DIAGNOSTICS_HPP
#define HLENS_DIAGNOSTICS_HPP

#include "hlens/config.hpp"
#include "hlens/model.hpp"
#include "hlens/optim.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hlens {

inline constexpr std::array<double, 6> kCheckpointFractions = {0.0, 0.01, 0.25, 0.50, 0.75, 1.00};

/// (# blocks with trace > 0) / (# blocks); zero trace counts as non-positive.
double positive_trace_ratio(const BlockHessianSet& blocks);

/// Sum over blocks of |trace|.
double total_abs_trace(const BlockHessianSet& blocks);

/// Arithmetic mean of per-block entropy gaps. Degenerate blocks are
/// excluded (names appended to `excluded` when given); all-degenerate input
/// raises Error(DegenerateSpectrum).
double mean_entropy_gap(const BlockHessianSet& blocks,
                        std::vector<std::string>* excluded = nullptr);

/// Population standard deviation of per-block entropies; needs at least two
/// non-degenerate blocks, otherwise Error(InsufficientBlocks).
double entropy_deviation(const BlockHessianSet& blocks);

/// Per-block scalar statistics for one dataset split.
struct SplitHessianStats {
  struct BlockStat {
    std::string name;
    double trace = 0.0;
    double entropy = 0.0;
    double gap = 0.0;
    bool degenerate = false;
  };
  std::vector<BlockStat> blocks;
  double pos_trace_ratio = 0.0;
  double total_abs_trace = 0.0;
  double mean_entropy_gap = 0.0;
  double entropy_deviation = 0.0;
  std::vector<std::string> excluded;
};

SplitHessianStats summarize_block_hessians(const BlockHessianSet& blocks);

struct CheckpointRecord {
  double fraction = 0.0;
  long step = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  // Hessian statistics on both splits, labeled explicitly. The canonical
  // table metrics take trace statistics from the train split and entropy
  // statistics from the test split.
  SplitHessianStats train_hessian;
  SplitHessianStats test_hessian;
  bool carried = false; // repeated from the last valid checkpoint (diverged runs)
};

struct TrainingTrace {
  std::string run_id;
  std::string config_digest;
  bool diverged = false;
  long diverged_at_step = -1;
  std::vector<CheckpointRecord> checkpoints; // always the six fractions, in order
};

/// Deterministic end-to-end run: seeded data, seeded init, full-batch
/// gradients, metrics at the six checkpoint fractions (the 0% checkpoint is
/// measured before any update). Divergence (loss above 1e6 or non-finite)
/// stops training; later checkpoint slots repeat the last valid record with
/// carried = true.
TrainingTrace run_training(const ExperimentConfig& config);

/// Serialized forms. JSON carries full-precision numbers; the CSV uses
/// 6-significant-digit formatting with the canonical column set.
std::string trace_json(const TrainingTrace& trace, const ExperimentConfig& config);
std::string trace_csv(const TrainingTrace& trace);

/// Paper-style summary: one block of rows per metric table, one row per
/// configuration, one column per checkpoint fraction.
std::string sweep_summary_csv(const std::vector<std::pair<std::string, TrainingTrace>>& runs);

struct SaddleReport {
  std::vector<double> lambdas;
  std::vector<double> displacement_sq; // (theta_i(T) - theta_i(0))^2
  double log_correlation = 0.0;        // over escape directions, when >= 2
  int escape_directions = 0;
};

/// Quadratic saddle L(theta) = 0.5 sum lambda_i theta_i^2 run from a random
/// point at radius 1e-3; reports per-direction squared displacement and the
/// correlation between log displacement^2 and log |lambda| over the escape
/// directions. All-nonnegative spectra raise Error(NoEscapeDirections).
SaddleReport saddle_escape_experiment(std::span<const double> spectrum,
                                      const OptimizerSpec& optimizer, long steps,
                                      std::uint64_t seed);

} // namespace hlens

#endif
