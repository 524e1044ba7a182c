#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/circuit.hpp"
#include "quatro/qcore/evolve.hpp"
#include "quatro/qcore/noise.hpp"

namespace quatro::walks {

// Drift at coupling 1 that puts the 4-state ground energy at -7.22.
inline constexpr double kCalibratedDrift = -2.271648136612389;
inline constexpr double kCalibratedGroundEnergy = -7.22;

/// Drift-diffusion walk over a lattice of n_states sites.
struct WalkModel {
  int n_states = 8;
  double drift = 0.25;    // diagonal slope mu
  double coupling = 1.0;  // nearest-neighbor amplitude sigma
  double dt = 1.0;

  void validate() const {
    if (n_states < 4 || !is_power_of_two(static_cast<std::size_t>(n_states))) {
      throw std::invalid_argument("WalkModel: n_states must be a power of two >= 4, got " + std::to_string(n_states));
    }
    if (!(dt > 0.0)) throw std::invalid_argument("WalkModel: dt must be positive");
    if (!std::isfinite(drift) || !std::isfinite(coupling)) throw std::invalid_argument("WalkModel: non-finite parameter");
  }
  int n_qubits() const { return log2_exact(static_cast<std::size_t>(n_states)); }
};

inline WalkModel calibrated_walk_model() { return {4, kCalibratedDrift, 1.0, 1.0}; }

inline Matrix walk_hamiltonian_dense(const WalkModel& m) {
  m.validate();
  const int n = m.n_states;
  Matrix h = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = m.drift * i;
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = m.coupling;
  }
  return h;
}

inline PauliSum build_walk_hamiltonian(const WalkModel& m) { return pauli_decompose(walk_hamiltonian_dense(m)); }

// Equal superposition of the two central sites.
inline StateVector default_initial_state(int n_states) {
  Vector a = Vector::Zero(n_states);
  a(n_states / 2 - 1) = a(n_states / 2) = 1.0 / std::numbers::sqrt2;
  return StateVector(log2_exact(static_cast<std::size_t>(n_states)), a);
}

/// Timestep-indexed probability tables; entry 0 is the initial state.
struct WalkResult {
  std::vector<std::vector<double>> probabilities;
  std::vector<double> survival;
  std::size_t shots = 0;               // 0 for exact evaluation
  std::vector<std::size_t> accepted;   // sampled absorbing path only

  std::size_t timesteps() const { return probabilities.empty() ? 0 : probabilities.size() - 1; }

  void push(std::vector<double> p) {
    double s = 0;
    for (double v : p) s += v;
    survival.push_back(s);
    probabilities.push_back(std::move(p));
  }

  void write_csv(std::ostream& os) const {
    os << "timestep,state,probability\n";
    os.precision(10);
    for (std::size_t t = 0; t < probabilities.size(); ++t)
      for (std::size_t i = 0; i < probabilities[t].size(); ++i) os << t << ',' << i << ',' << probabilities[t][i] << '\n';
  }
};

namespace detail {

inline void check_initial(const WalkModel& m, const StateVector& psi0) {
  m.validate();
  if (psi0.dim() != m.n_states) {
    throw std::invalid_argument("walk: initial state has dimension " + std::to_string(psi0.dim()) + ", model has " +
                                std::to_string(m.n_states) + " states");
  }
}

inline std::vector<double> norms(const Vector& v) {
  std::vector<double> p(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(v(i));
  return p;
}

inline void zero_boundary(Vector& v) {
  v(0) = 0;
  v(v.size() - 1) = 0;
}

}  // namespace detail

/// Free evolution: table k is |U^k psi0|^2 with U = exp(-i H dt).
inline WalkResult reflecting_walk(const WalkModel& m, const StateVector& psi0, int steps) {
  detail::check_initial(m, psi0);
  if (steps < 0) throw std::invalid_argument("reflecting_walk: negative step count");
  const Matrix u = time_evolution_operator(walk_hamiltonian_dense(m), m.dt);
  WalkResult r;
  Vector psi = psi0.amplitudes();
  r.push(detail::norms(psi));
  for (int k = 0; k < steps; ++k) {
    psi = u * psi;
    r.push(detail::norms(psi));
  }
  return r;
}

/// Detector over n main qubits plus one ancilla (qubit n): the ancilla flips
/// to |1> exactly when the main register is not |0...0> or |1...1>.
inline Circuit boundary_detector(int n_qubits) {
  if (n_qubits < 2) throw std::invalid_argument("boundary_detector: need at least 2 main qubits");
  const int anc = n_qubits;
  Circuit c(n_qubits + 1);
  std::vector<int> rest;
  for (int i = 1; i < n_qubits; ++i) {
    c.cx(0, i);
    rest.push_back(i);
  }
  // Qubits 1.. now read all-zero iff the register was on a boundary.
  for (int i : rest) c.x(i);
  c.mcx(rest, anc);
  c.x(anc);
  for (int i : rest) c.x(i);
  for (int i = n_qubits - 1; i >= 1; --i) c.cx(0, i);
  return c;
}

/// Exact absorbing walk: table t is |U (P U)^(t-1) psi0|^2, unnormalized, with
/// P the projector onto interior states.
inline WalkResult absorbing_walk_exact(const WalkModel& m, const StateVector& psi0, int steps) {
  detail::check_initial(m, psi0);
  if (steps < 0) throw std::invalid_argument("absorbing_walk: negative step count");
  const Matrix u = time_evolution_operator(walk_hamiltonian_dense(m), m.dt);
  WalkResult r;
  Vector psi = psi0.amplitudes();
  r.push(detail::norms(psi));
  for (int t = 1; t <= steps; ++t) {
    if (t > 1) detail::zero_boundary(psi);
    psi = u * psi;
    r.push(detail::norms(psi));
  }
  return r;
}

/// Circuit for timestep t on n main qubits + ancilla, with t-1 mid-circuit
/// detector measurements (clbit j = check after step j+1).
inline Circuit absorbing_walk_circuit(const WalkModel& m, int t) {
  m.validate();
  if (t < 1) throw std::invalid_argument("absorbing_walk_circuit: timestep must be >= 1");
  const int n = m.n_qubits();
  const Matrix u = time_evolution_operator(walk_hamiltonian_dense(m), m.dt);
  std::vector<int> main(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) main[static_cast<std::size_t>(i)] = i;
  const Circuit det = boundary_detector(n);
  Circuit c(n + 1, t - 1);
  for (int j = 0; j < t - 1; ++j) {
    c.unitary(main, u);
    c.append(det);
    c.measure(n, j);
    c.reset(n);
  }
  c.unitary(main, u);
  return c;
}

inline StateVector with_ancilla(const StateVector& psi0) {
  Vector a = Vector::Zero(psi0.dim() * 2);
  for (Eigen::Index i = 0; i < psi0.dim(); ++i) a(2 * i) = psi0.amplitudes()(i);
  return StateVector(psi0.n_qubits() + 1, a);
}

/// Sampled absorbing walk: per timestep, `shots` trajectories of the detector
/// circuit; runs with any mid-walk ancilla reading 0 are discarded, and the
/// table holds accepted-and-landed-on-i counts over all shots.
inline WalkResult absorbing_walk_sampled(const WalkModel& m, const StateVector& psi0, int steps, std::size_t shots,
                                         std::uint64_t seed, const NoiseModel& noise = {}) {
  detail::check_initial(m, psi0);
  if (shots == 0) throw std::invalid_argument("absorbing_walk: sampled path needs shots >= 1");
  if (steps < 0) throw std::invalid_argument("absorbing_walk: negative step count");
  const StateVector init = with_ancilla(psi0);
  WalkResult r;
  r.shots = shots;
  r.push(detail::norms(psi0.amplitudes()));
  r.accepted.push_back(shots);
  for (int t = 1; t <= steps; ++t) {
    const Circuit c = absorbing_walk_circuit(m, t);
    const std::string ok(static_cast<std::size_t>(t - 1), '1');
    std::vector<double> p(static_cast<std::size_t>(m.n_states), 0.0);
    std::size_t acc = 0;
    for (const auto& s : run_shots(c, init, noise, shots, mix_seed(seed, static_cast<std::uint64_t>(t)))) {
      if (s.clbits != ok) continue;
      ++acc;
      p[s.outcome >> 1] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(shots);
    r.push(std::move(p));
    r.accepted.push_back(acc);
  }
  return r;
}

/// Noisy absorbing-walk distribution at one timestep, averaged over Pauli
/// error trajectories with the detector outcomes post-selected. Returns the
/// per-state mass followed by the rejected mass.
inline std::vector<double> absorbing_walk_noisy(const WalkModel& m, const StateVector& psi0, int t,
                                                const NoiseModel& noise, std::size_t trajectories, std::uint64_t seed) {
  detail::check_initial(m, psi0);
  const Circuit c = absorbing_walk_circuit(m, t);
  const auto full = postselected_distribution(c, with_ancilla(psi0), noise, trajectories, seed,
                                              std::string(static_cast<std::size_t>(t - 1), '1'));
  std::vector<double> p(static_cast<std::size_t>(m.n_states) + 1, 0.0);
  double kept = 0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    p[i >> 1] += full[i];
    kept += full[i];
  }
  p.back() = std::max(0.0, 1.0 - kept);
  return p;
}

// Appends the rejected mass so the table is a full distribution.
inline std::vector<double> with_rejected(std::vector<double> p) {
  double s = 0;
  for (double v : p) s += v;
  p.push_back(std::max(0.0, 1.0 - s));
  return p;
}

}  // namespace quatro::walks
