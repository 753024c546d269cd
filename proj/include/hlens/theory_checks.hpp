#ifndef HLENS_THEORY_CHECKS_HPP
#define HLENS_THEORY_CHECKS_HPP

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hlens {

/// One named theorem/lemma verification with its computed values.
struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

/// Runs every numerical theorem check at the tolerances fixed in the check
/// implementations. Deterministic given the seed.
std::vector<CheckResult> run_theory_checks(std::uint64_t seed);

/// JSON report: one entry per named check plus an overall verdict.
nlohmann::json theory_report(std::uint64_t seed);

} // namespace hlens

#endif
