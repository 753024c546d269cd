#include "hlens/config.hpp"

#include "hlens/errors.hpp"
#include "hlens/fsio.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <vector>

namespace hlens {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& name, int line, int column, const std::string& msg) {
  raise(Err::InvalidConfig,
        name + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
}

long parse_long(const std::string& name, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(name, line, 1, "expected an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& name, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(name, line, 1, "expected a number, got '" + v + "'");
  }
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  int line;
};

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    raise(Err::InvalidConfig, "config file '" + path + "' does not exist");
  ExperimentConfig cfg = from_string(read_file(path), path);
  if (cfg.run_id.empty()) cfg.run_id = std::filesystem::path(path).stem().string();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text, const std::string& name) {
  // Pass 1: tokenize into key/value entries (last occurrence wins).
  std::map<std::string, Entry> entries;
  {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(name, lineno, 1, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(name, lineno, 1, "empty key");
      if (value.empty()) fail(name, lineno, static_cast<int>(eq) + 2, "empty value");
      entries[key] = Entry{value, lineno};
    }
  }

  static const char* known[] = {
      "model.layers",      "model.activation",  "dataset.kind",     "dataset.size",
      "dataset.seed",      "dataset.path",      "optimizer.kind",   "optimizer.lr",
      "optimizer.beta1",   "optimizer.beta2",   "optimizer.epsilon", "optimizer.tau_mode",
      "optimizer.tau",     "optimizer.schedule", "run.steps",        "run.seed",
      "run.id",            "output.dir",
  };
  for (const auto& [key, entry] : entries) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      fail(name, entry.line, 1, "unknown key '" + key + "'");
  }

  // Pass 2: apply, optimizer.kind first so its defaults never clobber
  // explicit settings regardless of key order in the file.
  ExperimentConfig cfg;
  auto get = [&](const char* key) -> const Entry* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  if (const Entry* e = get("optimizer.kind")) {
    try {
      cfg.optimizer = OptimizerSpec::defaults(opt_kind_from_string(e->value));
    } catch (const Error&) {
      fail(name, e->line, 1, "unknown optimizer kind '" + e->value + "'");
    }
  }
  if (const Entry* e = get("model.layers")) {
    std::vector<int> layers;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ','))
      layers.push_back(static_cast<int>(parse_long(name, e->line, trim(item))));
    cfg.layers = std::move(layers);
  }
  if (const Entry* e = get("model.activation")) {
    try {
      cfg.activation = activation_from_string(e->value);
    } catch (const Error&) {
      fail(name, e->line, 1, "unknown activation '" + e->value + "'");
    }
  }
  if (const Entry* e = get("dataset.kind")) cfg.dataset_kind = e->value;
  if (const Entry* e = get("dataset.size"))
    cfg.dataset_size = static_cast<int>(parse_long(name, e->line, e->value));
  if (const Entry* e = get("dataset.seed"))
    cfg.dataset_seed = static_cast<std::uint64_t>(parse_long(name, e->line, e->value));
  if (const Entry* e = get("dataset.path")) cfg.dataset_path = e->value;
  if (const Entry* e = get("optimizer.lr")) cfg.optimizer.lr = parse_double(name, e->line, e->value);
  if (const Entry* e = get("optimizer.beta1"))
    cfg.optimizer.beta1 = parse_double(name, e->line, e->value);
  if (const Entry* e = get("optimizer.beta2"))
    cfg.optimizer.beta2 = parse_double(name, e->line, e->value);
  if (const Entry* e = get("optimizer.epsilon"))
    cfg.optimizer.epsilon = parse_double(name, e->line, e->value);
  if (const Entry* e = get("optimizer.tau_mode")) {
    if (e->value == "fixed")
      cfg.optimizer.tau_mode = TauMode::fixed;
    else if (e->value == "auto")
      cfg.optimizer.tau_mode = TauMode::automatic;
    else
      fail(name, e->line, 1, "tau_mode must be 'fixed' or 'auto'");
  }
  if (const Entry* e = get("optimizer.tau")) cfg.optimizer.tau = parse_double(name, e->line, e->value);
  if (const Entry* e = get("optimizer.schedule")) {
    if (e->value == "constant")
      cfg.optimizer.schedule = LrSchedule::constant;
    else if (e->value == "linear")
      cfg.optimizer.schedule = LrSchedule::linear;
    else
      fail(name, e->line, 1, "schedule must be 'constant' or 'linear'");
  }
  if (const Entry* e = get("run.steps")) cfg.steps = parse_long(name, e->line, e->value);
  if (const Entry* e = get("run.seed"))
    cfg.run_seed = static_cast<std::uint64_t>(parse_long(name, e->line, e->value));
  if (const Entry* e = get("run.id")) cfg.run_id = e->value;
  if (const Entry* e = get("output.dir")) cfg.out_dir = e->value;

  cfg.optimizer.total_steps = cfg.steps;
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (layers.size() < 2) raise(Err::InvalidConfig, "model.layers needs at least two entries");
  for (int s : layers)
    if (s < 1) raise(Err::InvalidConfig, "model.layers entries must be positive");
  if (steps < 0) raise(Err::InvalidConfig, "run.steps must be >= 0");
  if (dataset_kind != "csv" && dataset_size < 8)
    raise(Err::InvalidConfig, "dataset.size must be >= 8");
  if (dataset_kind == "csv" && dataset_path.empty())
    raise(Err::InvalidConfig, "dataset.kind = csv requires dataset.path");
  OptimizerSpec check = optimizer;
  check.total_steps = std::max<long>(steps, 1);
  check.validate();
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  {
    std::string layers_s;
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers_s += (i ? "," : "") + std::to_string(layers[i]);
    kv["model.layers"] = layers_s;
  }
  kv["model.activation"] = to_string(activation);
  kv["dataset.kind"] = dataset_kind;
  kv["dataset.size"] = std::to_string(dataset_size);
  kv["dataset.seed"] = std::to_string(dataset_seed);
  if (!dataset_path.empty()) kv["dataset.path"] = dataset_path;
  kv["optimizer.kind"] = to_string(optimizer.kind);
  kv["optimizer.lr"] = fmt_double(optimizer.lr);
  kv["optimizer.beta1"] = fmt_double(optimizer.beta1);
  kv["optimizer.beta2"] = fmt_double(optimizer.beta2);
  kv["optimizer.epsilon"] = fmt_double(optimizer.epsilon);
  kv["optimizer.schedule"] = optimizer.schedule == LrSchedule::linear ? "linear" : "constant";
  if (optimizer.kind == OptKind::tanh_lion) {
    kv["optimizer.tau_mode"] = optimizer.tau_mode == TauMode::automatic ? "auto" : "fixed";
    kv["optimizer.tau"] = fmt_double(optimizer.tau);
  }
  kv["run.steps"] = std::to_string(steps);
  kv["run.seed"] = std::to_string(run_seed);
  if (!run_id.empty()) kv["run.id"] = run_id;

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace hlens
