#ifndef HLENS_CONFIG_HPP
#define HLENS_CONFIG_HPP

#include "hlens/model.hpp"
#include "hlens/optim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hlens {

/// Parsed experiment description. File format: flat `key = value` lines,
/// `#` comments, dotted section keys (see configs/ for samples).
struct ExperimentConfig {
  // model.*
  std::vector<int> layers = {2, 16, 2};
  Activation activation = Activation::tanh;
  // dataset.*
  std::string dataset_kind = "two_gaussians";
  int dataset_size = 200;
  std::uint64_t dataset_seed = 1;
  std::string dataset_path; // dataset.kind = csv only
  // optimizer.*
  OptimizerSpec optimizer = OptimizerSpec::defaults(OptKind::sgd);
  // run.*
  long steps = 1000;
  std::uint64_t run_seed = 1;
  std::string run_id;
  // output.*
  std::string out_dir = "out";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_string(const std::string& text, const std::string& name);

  void validate() const;

  /// Every key, defaults applied, one `key = value` per line, sorted.
  std::string canonical() const;

  /// FNV-1a 64-bit hash of canonical(), as 16 hex digits.
  std::string digest() const;
};

} // namespace hlens

#endif
