#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quatro/qubo/poly.hpp"

namespace quatro::qubo {

/// E(x) = constant + sum_i linear[i] x_i + sum_{i<j} quadratic[(i,j)] x_i x_j.
class Qubo {
 public:
  Qubo() = default;
  explicit Qubo(int n) : linear_(static_cast<std::size_t>(check_n(n)), 0.0) {}

  int n_vars() const { return static_cast<int>(linear_.size()); }
  const std::vector<double>& linear() const { return linear_; }
  const std::map<std::pair<int, int>, double>& quadratic() const { return quadratic_; }
  double constant() const { return constant_; }

  Qubo& add_linear(int i, double c) {
    check(i);
    linear_[static_cast<std::size_t>(i)] += c;
    return *this;
  }

  // Diagonal pairs fold into the linear term (x^2 = x).
  Qubo& add_quadratic(int i, int j, double c) {
    check(i);
    check(j);
    if (i == j) return add_linear(i, c);
    auto key = std::minmax(i, j);
    const double merged = quadratic_[key] + c;
    if (merged == 0.0) {
      quadratic_.erase(key);
    } else {
      quadratic_[key] = merged;
    }
    return *this;
  }

  Qubo& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  double quadratic_coeff(int i, int j) const {
    auto it = quadratic_.find(std::minmax(i, j));
    return it == quadratic_.end() ? 0.0 : it->second;
  }

  double energy(std::span<const std::uint8_t> x) const {
    if (static_cast<int>(x.size()) != n_vars()) throw std::invalid_argument("Qubo::energy: assignment size mismatch");
    double e = constant_;
    for (std::size_t i = 0; i < linear_.size(); ++i) {
      if (x[i]) e += linear_[i];
    }
    for (const auto& [k, c] : quadratic_) {
      if (x[static_cast<std::size_t>(k.first)] && x[static_cast<std::size_t>(k.second)]) e += c;
    }
    return e;
  }

  // Per-variable neighbor lists, for samplers.
  std::vector<std::vector<std::pair<int, double>>> adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(linear_.size());
    for (const auto& [k, c] : quadratic_) {
      adj[static_cast<std::size_t>(k.first)].emplace_back(k.second, c);
      adj[static_cast<std::size_t>(k.second)].emplace_back(k.first, c);
    }
    return adj;
  }

  PseudoBooleanPoly to_poly() const {
    PseudoBooleanPoly p(n_vars());
    p.add_constant(constant_);
    for (int i = 0; i < n_vars(); ++i) p.add({i}, linear_[static_cast<std::size_t>(i)]);
    for (const auto& [k, c] : quadratic_) p.add({k.first, k.second}, c);
    return p;
  }

  static Qubo from_poly(const PseudoBooleanPoly& p) {
    if (p.degree() > 2) throw std::invalid_argument("Qubo::from_poly: polynomial has degree " + std::to_string(p.degree()));
    Qubo q(p.n_vars());
    for (const auto& [m, c] : p.terms()) {
      if (m.empty()) q.add_constant(c);
      else if (m.size() == 1) q.add_linear(m[0], c);
      else q.add_quadratic(m[0], m[1], c);
    }
    return q;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n_vars();
    j["linear"] = nlohmann::json::object();
    for (int i = 0; i < n_vars(); ++i) {
      if (linear_[static_cast<std::size_t>(i)] != 0.0) j["linear"][std::to_string(i)] = linear_[static_cast<std::size_t>(i)];
    }
    j["quadratic"] = nlohmann::json::object();
    for (const auto& [k, c] : quadratic_) j["quadratic"][std::to_string(k.first) + "," + std::to_string(k.second)] = c;
    j["constant"] = constant_;
    return j;
  }

  static Qubo from_json(const nlohmann::json& j) {
    Qubo q(j.at("n").get<int>());
    if (j.contains("linear")) {
      for (const auto& [k, v] : j["linear"].items()) q.add_linear(parse_index(k), v.get<double>());
    }
    if (j.contains("quadratic")) {
      for (const auto& [k, v] : j["quadratic"].items()) {
        const auto comma = k.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("Qubo JSON: quadratic key '" + k + "' is not 'i,j'");
        const int a = parse_index(k.substr(0, comma)), b = parse_index(k.substr(comma + 1));
        if (a == b) throw std::invalid_argument("Qubo JSON: quadratic key '" + k + "' repeats a variable");
        q.add_quadratic(a, b, v.get<double>());
      }
    }
    q.constant_ = j.value("constant", 0.0);
    return q;
  }

 private:
  static int check_n(int n) {
    if (n < 0) throw std::invalid_argument("Qubo: negative variable count");
    return n;
  }
  void check(int i) const {
    if (i < 0 || i >= n_vars()) throw std::out_of_range("Qubo: variable " + std::to_string(i) + " out of range");
  }
  static int parse_index(const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument("Qubo JSON: bad variable index '" + s + "'");
    return v;
  }

  std::vector<double> linear_;
  std::map<std::pair<int, int>, double> quadratic_;
  double constant_ = 0.0;
};

struct SampleRecord {
  Bits assignment;
  double energy = 0.0;
  std::size_t occurrences = 1;
};

/// Distinct assignments with energies, ascending by energy.
class SampleSet {
 public:
  SampleSet() = default;

  static SampleSet from_samples(const Qubo& q, const std::vector<Bits>& samples) {
    std::map<Bits, std::size_t> seen;
    for (const auto& s : samples) ++seen[s];
    SampleSet out;
    for (auto& [bits, n] : seen) out.records_.push_back({bits, q.energy(bits), n});
    out.sort();
    return out;
  }

  void push(SampleRecord r) { records_.push_back(std::move(r)); }
  void sort() {
    std::stable_sort(records_.begin(), records_.end(), [](const SampleRecord& a, const SampleRecord& b) {
      if (a.energy != b.energy) return a.energy < b.energy;
      return a.assignment < b.assignment;
    });
  }

  const std::vector<SampleRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  const SampleRecord& best() const {
    if (records_.empty()) throw std::logic_error("SampleSet::best: empty sample set");
    return records_.front();
  }
  std::size_t total_occurrences() const {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.occurrences;
    return n;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : records_) {
      std::string bits;
      for (auto b : r.assignment) bits.push_back(b ? '1' : '0');
      j.push_back({{"assignment", bits}, {"energy", r.energy}, {"occurrences", r.occurrences}});
    }
    return j;
  }

 private:
  std::vector<SampleRecord> records_;
};

/// Exhaustive Gray-code enumeration. Returns the `keep` lowest assignments,
/// always including every assignment tied with the minimum.
inline SampleSet brute_force_min(const Qubo& q, std::size_t keep = 1) {
  const int n = q.n_vars();
  if (n > kMaxBruteForceVars) {
    throw std::invalid_argument("brute_force_min: " + std::to_string(n) + " variables exceeds the limit of " +
                                std::to_string(kMaxBruteForceVars));
  }
  if (keep < 1) keep = 1;
  const auto adj = q.adjacency();
  Bits x(static_cast<std::size_t>(n), 0);
  double e = q.constant();
  constexpr double kTieTol = 1e-9;

  // Candidates are pruned lazily; ties with the running minimum are kept.
  std::vector<SampleRecord> pool;
  double threshold = std::numeric_limits<double>::infinity();
  std::size_t limit = 4 * keep + 64;
  auto offer = [&](double energy) {
    if (energy > threshold + kTieTol) return;
    pool.push_back({x, energy, 1});
    if (pool.size() > limit) {
      std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
      const double floor = pool.front().energy;
      std::size_t cut = keep;
      while (cut < pool.size() && pool[cut].energy <= floor + kTieTol) ++cut;
      pool.resize(cut);
      threshold = pool[keep - 1].energy;
      limit = std::max(limit, 2 * pool.size());
    }
  };
  offer(e);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int v = std::countr_zero(k);
    const auto vi = static_cast<std::size_t>(v);
    double field = q.linear()[vi];
    for (const auto& [j, c] : adj[vi]) {
      if (x[static_cast<std::size_t>(j)]) field += c;
    }
    e += x[vi] ? -field : field;
    x[vi] ^= 1U;
    offer(e);
  }
  SampleSet out;
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  const double floor = pool.front().energy;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i >= keep && pool[i].energy > floor + kTieTol) break;
    // Re-evaluate to drop accumulated rounding from the incremental walk.
    pool[i].energy = q.energy(pool[i].assignment);
    out.push(pool[i]);
  }
  out.sort();
  return out;
}

}  // namespace quatro::qubo
