#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/pauli.hpp"
#include "quatro/qcore/rng.hpp"

namespace quatro {

inline constexpr double kNormTol = 1e-10;

// Bitstring -> occurrences; bitstrings read qubit 0 first.
using Counts = std::map<std::string, std::size_t>;

class StateVector {
 public:
  StateVector() = default;

  explicit StateVector(int n_qubits) : n_(n_qubits), amps_(Vector::Zero(dim_of(n_qubits))) {
    amps_(0) = 1.0;
  }

  StateVector(int n_qubits, Vector amps) : n_(n_qubits), amps_(std::move(amps)) {
    if (amps_.size() != dim_of(n_qubits)) {
      throw std::invalid_argument("StateVector: amplitude count " + std::to_string(amps_.size()) +
                                  " != 2^" + std::to_string(n_qubits));
    }
  }

  static StateVector basis(int n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    if (index >= static_cast<std::uint64_t>(s.dim())) throw std::out_of_range("StateVector::basis: index out of range");
    s.amps_(0) = 0.0;
    s.amps_(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
  }

  // Normalizes the given amplitudes; rejects the zero vector.
  static StateVector normalized(const Vector& amps) {
    const auto dim = static_cast<std::size_t>(amps.size());
    if (!is_power_of_two(dim) || dim < 2) throw std::invalid_argument("StateVector: dimension is not a power of two");
    const double nrm = amps.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("StateVector: zero vector cannot be normalized");
    return StateVector(log2_exact(dim), amps / nrm);
  }

  int n_qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  Vector& amplitudes() { return amps_; }
  cplx operator[](std::uint64_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  double norm_squared() const { return amps_.squaredNorm(); }
  bool is_normalized(double tol = kNormTol) const { return std::abs(norm_squared() - 1.0) <= tol; }

  std::vector<double> probabilities() const {
    std::vector<double> p(static_cast<std::size_t>(dim()));
    for (Eigen::Index i = 0; i < dim(); ++i) p[static_cast<std::size_t>(i)] = std::norm(amps_(i));
    return p;
  }

 private:
  static Eigen::Index dim_of(int n) {
    if (n < 1 || n > 30) throw std::invalid_argument("StateVector: qubit count must be in [1, 30]");
    return static_cast<Eigen::Index>(1ULL << n);
  }

  int n_ = 0;
  Vector amps_;
};

inline void check_targets(std::span<const int> targets, int n_qubits) {
  if (targets.empty()) throw std::invalid_argument("measure: target set is empty");
  std::set<int> seen;
  for (int t : targets) {
    if (t < 0 || t >= n_qubits) throw std::out_of_range("measure: qubit " + std::to_string(t) + " out of range");
    if (!seen.insert(t).second) throw std::invalid_argument("measure: duplicate target " + std::to_string(t));
  }
}

/// Marginal probabilities over `targets`; entry k corresponds to the bitstring
/// of k with targets[0] as its leading bit.
inline std::vector<double> measure_probs(const StateVector& psi, std::span<const int> targets) {
  check_targets(targets, psi.n_qubits());
  const int k = static_cast<int>(targets.size());
  std::vector<double> out(1ULL << k, 0.0);
  for (Eigen::Index i = 0; i < psi.dim(); ++i) {
    std::uint64_t key = 0;
    for (int t : targets) key = (key << 1) | static_cast<std::uint64_t>(qubit_bit(static_cast<std::uint64_t>(i), t, psi.n_qubits()));
    out[key] += std::norm(psi.amplitudes()(i));
  }
  return out;
}

inline std::map<std::string, double> measure_probs_table(const StateVector& psi, std::span<const int> targets) {
  const auto p = measure_probs(psi, targets);
  std::map<std::string, double> table;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) table[to_bitstring(i, static_cast<int>(targets.size()))] = p[i];
  }
  return table;
}

// Inverse-CDF draw from a (possibly unnormalized) weight vector.
inline std::size_t draw_index(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

inline std::vector<double> cumulative_sum(std::span<const double> w) {
  std::vector<double> c(w.size());
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = acc += w[i];
  return c;
}

/// Draws `shots` full-register outcomes; deterministic for a given seed.
inline Counts sample(const StateVector& psi, std::size_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  const auto cdf = cumulative_sum(psi.probabilities());
  Rng rng(seed);
  std::vector<std::size_t> hits(cdf.size(), 0);
  for (std::size_t s = 0; s < shots; ++s) ++hits[draw_index(cdf, rng)];
  Counts counts;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) counts[to_bitstring(i, psi.n_qubits())] = hits[i];
  }
  return counts;
}

inline std::map<std::string, double> normalize_counts(const Counts& c, std::size_t total) {
  std::map<std::string, double> p;
  for (const auto& [k, v] : c) p[k] = static_cast<double>(v) / static_cast<double>(total);
  return p;
}

// 0.5 * sum |p - q| over the union of keys.
inline double total_variation(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  double tv = 0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    tv += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.count(k)) tv += std::abs(v);
  }
  return 0.5 * tv;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double tv = 0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace quatro
