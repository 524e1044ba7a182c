#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace quatro::harness {

using nlohmann::json;

/// Column-named table; cells are JSON scalars so numbers keep full precision.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  Table& add(std::vector<json> row) {
    if (row.size() != columns.size()) {
      throw std::logic_error("Table: row has " + std::to_string(row.size()) + " cells for " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
    return *this;
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw std::out_of_range("Table: no column '" + name + "'");
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) os << ',';
        const json& c = r[i];
        if (c.is_string()) {
          os << c.get<std::string>();
        } else if (c.is_number_float()) {
          std::ostringstream s;
          s << std::setprecision(std::numeric_limits<double>::max_digits10) << c.get<double>();
          os << s.str();
        } else {
          os << c.dump();
        }
      }
      os << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
};

struct ExperimentConfig {
  std::string experiment;
  json params = json::object();
  std::uint64_t seed = 0;
  std::string output;  // directory for tables and result.json; empty writes nothing

  /// Requires "experiment" and "seed"; "params" and "output" are optional.
  static ExperimentConfig from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (k != "experiment" && k != "params" && k != "seed" && k != "output") throw std::invalid_argument("config: unknown key '" + k + "'");
    }
    if (!j.contains("experiment") || !j.at("experiment").is_string()) throw std::invalid_argument("config: \"experiment\" (string) is required");
    if (!j.contains("seed") || !j.at("seed").is_number_integer() || (!j.at("seed").is_number_unsigned() && j.at("seed").get<std::int64_t>() < 0)) {
      throw std::invalid_argument("config: \"seed\" (non-negative integer) is required for reproducibility");
    }
    ExperimentConfig c;
    c.experiment = j.at("experiment").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw std::invalid_argument("config: \"params\" must be an object");
      c.params = j.at("params");
    }
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    return c;
  }

  static ExperimentConfig parse(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    return from_json(j);
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return parse(ss.str());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }

  json to_json() const {
    json j = {{"experiment", experiment}, {"params", params}, {"seed", seed}};
    if (!output.empty()) j["output"] = output;
    return j;
  }
};

/// Parses QUATRO_SEED if set; malformed values are errors, not ignored.
inline std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("QUATRO_SEED");
  if (!s || !*s) return std::nullopt;
  const std::string t(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw std::invalid_argument("QUATRO_SEED='" + t + "' is not a non-negative integer");
  return v;
}

inline ExperimentConfig with_env_seed(ExperimentConfig c) {
  if (const auto s = seed_from_env()) c.seed = *s;
  return c;
}

inline std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) throw std::runtime_error("sha1: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

/// Same digest git assigns a blob with this content.
inline std::string git_blob_hash(const std::string& content) {
  return sha1_hex("blob " + std::to_string(content.size()) + std::string(1, '\0') + content);
}

struct ResultBundle {
  json config;             // resolved config: rerunning it reproduces the tables
  std::string input_hash;  // git blob hash over the config and any input files
  std::map<std::string, Table> tables;
  json metrics = json::object();
  double runtime_s = 0.0;

  json summary() const {
    json t = json::array();
    for (const auto& [name, tab] : tables) t.push_back(name);
    return {{"config", config}, {"input_hash", input_hash}, {"metrics", metrics}, {"tables", t}, {"runtime_s", runtime_s}};
  }

  /// Writes <name>.csv per table and result.json into `dir`.
  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, tab] : tables) {
      std::ofstream f(dir / (name + ".csv"));
      if (!f) throw std::runtime_error("cannot write " + (dir / (name + ".csv")).string());
      tab.write_csv(f);
    }
    std::ofstream f(dir / "result.json");
    if (!f) throw std::runtime_error("cannot write " + (dir / "result.json").string());
    f << summary().dump(2) << '\n';
  }
};

}  // namespace quatro::harness
