#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/circuit.hpp"

namespace quatro {

/// Depolarizing probabilities: p1 for gates touching one qubit, p2 for gates
/// touching two or more (the injected Pauli is drawn uniformly over all 4^k
/// strings on the touched qubits, identity included).
struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;

  void validate() const {
    if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0)) {
      throw std::invalid_argument("NoiseModel: probabilities must lie in [0, 1]");
    }
  }
  bool is_noiseless() const { return p1 == 0.0 && p2 == 0.0; }
};

struct ShotRecord {
  std::string clbits;       // mid-circuit results, clbit 0 first
  std::uint64_t outcome = 0; // final full-register measurement
};

namespace detail {

inline void inject_depolarizing(StateVector& psi, const Gate& g, const NoiseModel& noise, Rng& rng) {
  const auto q = g.touched();
  const double p = q.size() == 1 ? noise.p1 : noise.p2;
  if (p <= 0.0 || rng.uniform() >= p) return;
  std::string label(static_cast<std::size_t>(psi.n_qubits()), 'I');
  static constexpr char kLabels[4] = {'I', 'X', 'Y', 'Z'};
  for (int t : q) label[static_cast<std::size_t>(t)] = kLabels[rng.below(4)];
  psi.amplitudes() = PauliString(label).apply(psi.amplitudes());
}

// Measures qubit q in place. With `forced`, the state is projected onto that
// outcome without renormalizing (post-selection keeps the branch weight);
// otherwise the outcome is drawn and the pre-measurement norm is restored.
inline int measure_qubit(StateVector& psi, int q, Rng& rng, std::optional<int> forced) {
  auto& a = psi.amplitudes();
  const int n = psi.n_qubits();
  if (forced) {
    project(a, q, n, *forced);
    return *forced;
  }
  const double total = a.squaredNorm();
  const double p1 = prob_one(a, q, n);
  const int outcome = rng.uniform() * total < p1 ? 1 : 0;
  project(a, q, n, outcome);
  const double kept = outcome ? p1 : total - p1;
  if (kept > 0) a *= std::sqrt(total / kept);
  return outcome;
}

}  // namespace detail

/// Runs one trajectory of `c` from `init`. Mid-circuit measurements are
/// sampled unless `postselect` fixes their outcomes (one char per clbit,
/// '0'/'1', or '.' to sample).
inline std::string run_trajectory(const Circuit& c, StateVector& psi, const NoiseModel& noise, Rng& rng,
                                  const std::string* postselect = nullptr) {
  if (c.n_qubits() != psi.n_qubits()) throw std::invalid_argument("run_trajectory: register size mismatch");
  std::string clbits(static_cast<std::size_t>(c.n_clbits()), '0');
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Measure: {
        std::optional<int> forced;
        if (postselect) {
          const char want = (*postselect)[static_cast<std::size_t>(g.clbit)];
          if (want == '0' || want == '1') forced = want - '0';
        }
        const int r = detail::measure_qubit(psi, g.targets[0], rng, forced);
        clbits[static_cast<std::size_t>(g.clbit)] = static_cast<char>('0' + r);
        break;
      }
      case GateKind::Reset: {
        const int r = detail::measure_qubit(psi, g.targets[0], rng, std::nullopt);
        if (r == 1) detail::apply_matrix(psi.amplitudes(), psi.n_qubits(), {}, g.targets, Gate::of(GateKind::X, {}, g.targets).target_matrix());
        break;
      }
      default:
        apply_gate(psi, g);
        detail::inject_depolarizing(psi, g, noise, rng);
    }
  }
  return clbits;
}

/// Shot-by-shot execution with a final full-register measurement. Shot s
/// uses the stream (seed, s), so results do not depend on evaluation order.
inline std::vector<ShotRecord> run_shots(const Circuit& c, const StateVector& init, const NoiseModel& noise,
                                         std::size_t shots, std::uint64_t seed) {
  noise.validate();
  if (shots < 1) throw std::invalid_argument("run_shots: shots must be >= 1");
  std::vector<ShotRecord> out(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    Rng rng(seed, s);
    StateVector psi = init;
    out[s].clbits = run_trajectory(c, psi, noise, rng);
    const auto cdf = cumulative_sum(psi.probabilities());
    out[s].outcome = draw_index(cdf, rng);
  }
  return out;
}

/// Noisy sampling from |0...0>; p1 = p2 = 0 reproduces sample(apply_circuit()).
inline Counts run_noisy(const Circuit& c, const NoiseModel& noise, std::size_t shots, std::uint64_t seed) {
  Counts counts;
  for (const auto& r : run_shots(c, StateVector(c.n_qubits()), noise, shots, seed)) {
    ++counts[to_bitstring(r.outcome, c.n_qubits())];
  }
  return counts;
}

/// Trajectory average of the unnormalized final distribution with every
/// mid-circuit measurement post-selected on `accept`. Only the Pauli error
/// pattern is sampled; with no noise a single trajectory is exact.
inline std::vector<double> postselected_distribution(const Circuit& c, const StateVector& init, const NoiseModel& noise,
                                                     std::size_t trajectories, std::uint64_t seed,
                                                     const std::string& accept) {
  noise.validate();
  if (trajectories < 1) throw std::invalid_argument("postselected_distribution: need at least one trajectory");
  if (static_cast<int>(accept.size()) != c.n_clbits()) throw std::invalid_argument("postselected_distribution: accept pattern size");
  std::vector<double> acc(static_cast<std::size_t>(init.dim()), 0.0);
  const std::size_t runs = noise.is_noiseless() ? 1 : trajectories;
  for (std::size_t t = 0; t < runs; ++t) {
    Rng rng(seed, t);
    StateVector psi = init;
    run_trajectory(c, psi, noise, rng, &accept);
    const auto p = psi.probabilities();
    for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
  }
  for (double& v : acc) v /= static_cast<double>(runs);
  return acc;
}

}  // namespace quatro
