#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/harness/bundle.hpp"

#ifndef QUATRO_DATA_DIR
#define QUATRO_DATA_DIR "data"
#endif

namespace quatro::harness {

/// Experiment parameters merged over their defaults. Unknown keys and values
/// of the wrong JSON kind are rejected up front, so a typo never silently
/// falls back to a default.
class Params {
 public:
  Params(const std::string& experiment, const json& defaults, const json& given) : experiment_(experiment), values_(defaults) {
    if (!given.is_object()) throw std::invalid_argument(experiment + ": params must be an object");
    for (const auto& [k, v] : given.items()) {
      if (!defaults.contains(k)) throw std::invalid_argument(experiment + ": unknown parameter '" + k + "'");
      if (!same_kind(defaults.at(k), v)) throw std::invalid_argument(experiment + ": parameter '" + k + "' expects " + kind(defaults.at(k)));
      values_[k] = v;
    }
  }

  const json& resolved() const { return values_; }

  double num(const std::string& k) const { return values_.at(k).get<double>(); }

  int integer(const std::string& k) const { return to_int(values_.at(k), k); }

  std::string str(const std::string& k) const { return values_.at(k).get<std::string>(); }

  bool flag(const std::string& k) const { return values_.at(k).get<bool>(); }

  std::vector<double> nums(const std::string& k) const { return values_.at(k).get<std::vector<double>>(); }

  std::vector<int> ints(const std::string& k) const {
    std::vector<int> out;
    for (const auto& v : values_.at(k)) out.push_back(to_int(v, k));
    return out;
  }

  /// Integer that must be at least `lo`.
  int at_least(const std::string& k, int lo) const {
    const int v = integer(k);
    if (v < lo) throw std::invalid_argument(experiment_ + ": '" + k + "' must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
    return v;
  }

  /// String restricted to `choices`.
  std::string choice(const std::string& k, std::initializer_list<const char*> choices) const {
    const std::string v = str(k);
    std::string all;
    for (const char* c : choices) {
      if (v == c) return v;
      all += all.empty() ? c : std::string("|") + c;
    }
    throw std::invalid_argument(experiment_ + ": '" + k + "' must be one of " + all + ", got '" + v + "'");
  }

 private:
  static bool same_kind(const json& a, const json& b) {
    if (a.is_number()) return b.is_number();
    if (a.is_array()) {
      if (!b.is_array()) return false;
      for (const auto& x : b) {
        if (!x.is_number()) return false;
      }
      return true;
    }
    return a.type() == b.type();
  }

  static std::string kind(const json& a) {
    if (a.is_number()) return "a number";
    if (a.is_array()) return "an array of numbers";
    if (a.is_boolean()) return "a boolean";
    return "a string";
  }

  int to_int(const json& v, const std::string& k) const {
    const double d = v.get<double>();
    if (d != std::floor(d) || std::abs(d) > 2e9) throw std::invalid_argument(experiment_ + ": '" + k + "' must be an integer");
    return static_cast<int>(d);
  }

  std::string experiment_;
  json values_;
};

struct Run {
  const Params& p;
  std::uint64_t seed;
  ResultBundle& out;
  std::vector<std::filesystem::path> inputs;  // files whose content enters input_hash

  Table& table(const std::string& name, std::vector<std::string> columns) {
    auto [it, fresh] = out.tables.emplace(name, Table(std::move(columns)));
    if (!fresh) throw std::logic_error("table '" + name + "' emitted twice");
    return it->second;
  }
};

struct Experiment {
  std::string name;
  std::string summary;
  json defaults;
  std::function<void(Run&)> body;
};

/// Directory of shipped data (calibration, example workloads). QUATRO_DATA_DIR
/// in the environment wins over the build-time location.
inline std::filesystem::path data_dir() {
  if (const char* d = std::getenv("QUATRO_DATA_DIR"); d && *d) return d;
  return QUATRO_DATA_DIR;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Git blob hash over the resolved config (output path excluded) followed by
/// the content of every input file in the order the experiment read them.
inline std::string input_hash(const json& resolved_config, const std::vector<std::filesystem::path>& inputs) {
  json c = resolved_config;
  c.erase("output");
  std::string blob = c.dump();
  for (const auto& f : inputs) {
    blob += '\n';
    blob += read_file(f);
  }
  return git_blob_hash(blob);
}

// Defined in experiments.hpp.
inline const std::vector<Experiment>& experiments();

inline const Experiment& find_experiment(const std::string& name) {
  std::string known;
  for (const auto& e : experiments()) {
    if (e.name == name) return e;
    known += (known.empty() ? "" : ", ") + e.name;
  }
  throw std::invalid_argument("unknown experiment '" + name + "' (known: " + known + ")");
}

/// Fills in defaults without running, so a config can be checked cheaply.
inline ExperimentConfig resolve(const ExperimentConfig& cfg) {
  const Experiment& e = find_experiment(cfg.experiment);
  ExperimentConfig out = cfg;
  out.params = Params(e.name, e.defaults, cfg.params).resolved();
  return out;
}

/// Dispatches to the owning module and, when cfg.output is set, writes the
/// bundle there. The echoed config carries every resolved parameter, so
/// running it again reproduces the tables byte for byte.
inline ResultBundle run(const ExperimentConfig& cfg) {
  const Experiment& e = find_experiment(cfg.experiment);
  const Params p(e.name, e.defaults, cfg.params);
  ExperimentConfig resolved = cfg;
  resolved.params = p.resolved();
  ResultBundle out;
  out.config = resolved.to_json();
  const auto t0 = std::chrono::steady_clock::now();
  Run r{p, cfg.seed, out, {}};
  e.body(r);
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.input_hash = input_hash(out.config, r.inputs);
  if (!cfg.output.empty()) out.write(cfg.output);
  return out;
}

}  // namespace quatro::harness
