// hlens: batch front door for the optimizer diagnostics lab.
//
//   hlens run <cfg>                          one experiment -> trace JSON + CSV
//   hlens sweep <dir> [--jobs N]             every .cfg in a directory + summary
//   hlens verify-theory [--seed S] [--report P]
//   hlens bayes-sim --mu M --sigma S --samples N [--seed S] [--csv P]
//
// Exit codes: 0 ok, 1 usage/config error, 2 numeric divergence.

#include "hlens/config.hpp"
#include "hlens/diagnostics.hpp"
#include "hlens/errors.hpp"
#include "hlens/fsio.hpp"
#include "hlens/kernels.hpp"
#include "hlens/theory.hpp"
#include "hlens/theory_checks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace {

namespace fs = std::filesystem;

std::string resolve_out_dir(const std::string& configured) {
  const char* env = std::getenv("HLENS_OUT");
  return (env && *env) ? std::string(env) : configured;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int run_one(const std::string& cfg_path, std::string* out_dir_used,
            hlens::TrainingTrace* trace_out) {
  const hlens::ExperimentConfig cfg = hlens::ExperimentConfig::from_file(cfg_path);
  const std::string out_dir = resolve_out_dir(cfg.out_dir);
  const hlens::TrainingTrace trace = hlens::run_training(cfg);
  hlens::write_file_atomic((fs::path(out_dir) / (cfg.run_id + ".trace.json")).string(),
                           hlens::trace_json(trace, cfg));
  hlens::write_file_atomic((fs::path(out_dir) / (cfg.run_id + ".trace.csv")).string(),
                           hlens::trace_csv(trace));
  if (out_dir_used) *out_dir_used = out_dir;
  if (trace_out) *trace_out = trace;
  return trace.diverged ? 2 : 0;
}

int cmd_run(const std::string& cfg_path) {
  hlens::TrainingTrace trace;
  std::string out_dir;
  const int rc = run_one(cfg_path, &out_dir, &trace);
  std::cout << "run " << trace.run_id << ": " << (trace.diverged ? "diverged" : "ok")
            << ", trace written to " << out_dir << "\n";
  return rc;
}

int cmd_sweep(const std::string& dir, int jobs) {
  std::vector<std::string> cfgs;
  if (!fs::is_directory(dir)) {
    std::cerr << "error: '" << dir << "' is not a directory\n";
    return 1;
  }
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cfg")
      cfgs.push_back(entry.path().string());
  if (cfgs.empty()) {
    std::cerr << "error: no .cfg files in '" << dir << "'\n";
    return 1;
  }
  std::sort(cfgs.begin(), cfgs.end());

  std::vector<std::pair<std::string, hlens::TrainingTrace>> runs(cfgs.size());
  std::vector<int> codes(cfgs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfgs.size()) return;
      try {
        hlens::TrainingTrace trace;
        codes[i] = run_one(cfgs[i], nullptr, &trace);
        runs[i] = {trace.run_id, std::move(trace)};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        errors.push_back(cfgs[i] + ": " + e.what());
        codes[i] = 1;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(cfgs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (const std::string& e : errors) std::cerr << "error: " << e << "\n";
  if (!errors.empty()) return 1;

  const hlens::ExperimentConfig first = hlens::ExperimentConfig::from_file(cfgs.front());
  const std::string out_dir = resolve_out_dir(first.out_dir);
  hlens::write_file_atomic((fs::path(out_dir) / "sweep_summary.csv").string(),
                           hlens::sweep_summary_csv(runs));

  int rc = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::cout << "run " << runs[i].first << ": " << (codes[i] == 2 ? "diverged" : "ok") << "\n";
    rc = std::max(rc, codes[i]);
  }
  std::cout << "summary written to " << (fs::path(out_dir) / "sweep_summary.csv").string() << "\n";
  return rc;
}

int cmd_verify_theory(std::uint64_t seed, const std::string& report_path) {
  const nlohmann::json report = hlens::theory_report(seed);
  for (const auto& check : report["checks"])
    std::cout << (check["status"] == "pass" ? "[PASS] " : "[FAIL] ")
              << check["name"].get<std::string>() << "\n";
  if (!report_path.empty()) hlens::write_file_atomic(report_path, report.dump(2) + "\n");
  const bool all = report["all_pass"].get<bool>();
  std::cout << (all ? "all checks passed" : "SOME CHECKS FAILED") << "\n";
  return all ? 0 : 1;
}

int cmd_bayes_sim(double mu, double sigma, long samples, std::uint64_t seed,
                  const std::string& csv_path) {
  if (!(sigma > 0.0)) {
    std::cerr << "error: sigma must be > 0\n";
    return 1;
  }
  if (samples < 10000) {
    std::cerr << "error: need at least 10000 samples\n";
    return 1;
  }
  const hlens::GaussianSignChannel ch{mu, sigma};
  const auto rule = [&ch](double x) { return hlens::bayes_classifier(ch, x); };
  const hlens::FanoReport rep = hlens::empirical_error_and_fano(ch, rule, samples, seed);
  const double phi = hlens::bayes_error(ch);

  std::cout << "metric,value\n";
  std::cout << "empirical_error," << fmt6(rep.epsilon_hat) << "\n";
  std::cout << "bayes_error_closed_form," << fmt6(phi) << "\n";
  std::cout << "binary_entropy_of_error," << fmt6(rep.binary_entropy_of_eps) << "\n";
  std::cout << "conditional_entropy," << fmt6(rep.cond_entropy_hat) << "\n";
  std::cout << "fano_holds," << (rep.holds ? "yes" : "no") << "\n";

  if (!csv_path.empty()) {
    std::string csv = "metric,value\n";
    csv += "empirical_error," + fmt6(rep.epsilon_hat) + "\n";
    csv += "bayes_error_closed_form," + fmt6(phi) + "\n";
    csv += "binary_entropy_of_error," + fmt6(rep.binary_entropy_of_eps) + "\n";
    csv += "conditional_entropy," + fmt6(rep.cond_entropy_hat) + "\n";
    csv += std::string("fano_holds,") + (rep.holds ? "yes" : "no") + "\n";
    hlens::write_file_atomic(csv_path, csv);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hlens: Hessian-entropy optimizer diagnostics"};
  app.require_subcommand(1);

  std::string cfg_path, sweep_dir, report_path, csv_path;
  int jobs = 1;
  std::uint64_t seed = 1;
  double mu = 1.0, sigma = 1.0;
  long samples = 1000000;

  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", cfg_path, "path to a .cfg file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "run every .cfg in a directory");
  sweep->add_option("dir", sweep_dir, "directory of .cfg files")->required();
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify-theory", "numerical theorem checks");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--report", report_path, "write the JSON report here");

  CLI::App* bayes = app.add_subcommand("bayes-sim", "binary sign-channel simulation");
  bayes->add_option("--mu", mu, "channel mean")->required();
  bayes->add_option("--sigma", sigma, "channel noise")->required();
  bayes->add_option("--samples", samples, "sample count");
  bayes->add_option("--seed", seed, "random seed");
  bayes->add_option("--csv", csv_path, "also write the table to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(cfg_path);
    if (sweep->parsed()) return cmd_sweep(sweep_dir, jobs);
    if (verify->parsed()) return cmd_verify_theory(seed, report_path);
    if (bayes->parsed()) return cmd_bayes_sim(mu, sigma, samples, seed, csv_path);
  } catch (const hlens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
