#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/mpmw/ansatz.hpp"
#include "quatro/mpmw/optimize.hpp"
#include "quatro/qcore/evolve.hpp"

namespace quatro::mpmw {

enum class SsvqeVariant { B, C };
enum class OptimizerKind { Spsa, Simplex };

struct SsvqeConfig {
  SsvqeVariant variant = SsvqeVariant::B;
  int k = 0;
  double w = 0.5;               // variant B weight on the target state
  std::vector<double> weights;  // variant C; empty means w_j = 1/(j+1)
  OptimizerKind optimizer = OptimizerKind::Spsa;
  int max_iters = 500;
  std::uint64_t seed = 0;
  SpsaConfig spsa{};
  SimplexConfig simplex{};

  std::vector<double> effective_weights() const {
    if (k < 0) throw std::invalid_argument("SsvqeConfig: k must be >= 0");
    if (variant == SsvqeVariant::B) {
      if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("SsvqeConfig: variant B weight must lie in (0, 1]");
      std::vector<double> out(static_cast<std::size_t>(k) + 1, 1.0);
      out.back() = w;
      return out;
    }
    std::vector<double> out = weights;
    if (out.empty()) {
      for (int j = 0; j <= k; ++j) out.push_back(1.0 / (j + 1));
    }
    if (static_cast<int>(out.size()) != k + 1) throw std::invalid_argument("SsvqeConfig: need k+1 weights for variant C");
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (!(out[j] > 0.0) || (j > 0 && !(out[j] < out[j - 1]))) {
        throw std::invalid_argument("SsvqeConfig: variant C weights must be positive and strictly decreasing");
      }
    }
    return out;
  }
};

struct TraceRow {
  int iteration = 0;
  double cost = 0.0;
  std::vector<double> energies;  // per tracked input state
  std::size_t evaluations = 0;   // state preparations so far
};

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  const std::size_t m = rows.empty() ? 0 : rows.front().energies.size();
  os << "iteration,cost";
  for (std::size_t j = 0; j < m; ++j) os << ",energy_" << j;
  os << ",evaluations\n";
  os.precision(12);
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.cost;
    for (double e : r.energies) os << ',' << e;
    os << ',' << r.evaluations << '\n';
  }
}

struct SsvqeResult {
  std::vector<double> params;
  std::vector<double> energies;   // <phi_j|H|phi_j>, j = 0..k, at the final parameters
  std::vector<double> estimates;  // B: {E_k}; C: E_0..E_k
  double cost = 0.0;
  std::vector<TraceRow> trace;
  std::size_t objective_evaluations = 0;
  std::size_t state_preparations = 0;
};

inline std::vector<double> ansatz_energies(const Matrix& h, const Ansatz& a, const std::vector<double>& theta, int k) {
  const Matrix u = a.unitary(theta);
  std::vector<double> e(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) e[static_cast<std::size_t>(j)] = (u.col(j).adjoint() * h * u.col(j))(0).real();
  return e;
}

inline double ssvqe_cost(const std::vector<double>& energies, const std::vector<double>& weights) {
  double c = 0;
  for (std::size_t j = 0; j < energies.size(); ++j) c += weights[j] * energies[j];
  return c;
}

/// Subspace-search VQE. Inputs |0>..|k> go through one shared ansatz, so the
/// outputs stay orthonormal. Every objective evaluation prepares k+1 states.
inline SsvqeResult ssvqe(const PauliSum& hs, const SsvqeConfig& cfg, const Ansatz& ansatz) {
  ansatz.validate();
  if (hs.n_qubits() != ansatz.n_qubits) throw std::invalid_argument("ssvqe: ansatz and Hamiltonian register sizes differ");
  if (cfg.k + 1 > (1 << ansatz.n_qubits)) throw std::invalid_argument("ssvqe: k exceeds the Hilbert-space dimension");
  const auto weights = cfg.effective_weights();
  const Matrix h = hs.dense();
  const std::size_t per_eval = static_cast<std::size_t>(cfg.k) + 1;

  Rng init(cfg.seed, 0xA5);
  std::vector<double> x0(ansatz.n_params());
  for (auto& t : x0) t = init.uniform(-std::numbers::pi, std::numbers::pi);

  SsvqeResult out;
  std::size_t calls = 0;
  const Objective f = [&](const std::vector<double>& th) {
    ++calls;
    return ssvqe_cost(ansatz_energies(h, ansatz, th, cfg.k), weights);
  };
  // Per-state energies in the trace are simulator diagnostics, not counted.
  const IterationHook hook = [&](int it, const std::vector<double>& th, double cost) {
    out.trace.push_back({it, cost, ansatz_energies(h, ansatz, th, cfg.k), calls * per_eval});
  };
  OptimResult r;
  if (cfg.optimizer == OptimizerKind::Spsa) {
    SpsaConfig s = cfg.spsa;
    s.iters = cfg.max_iters;
    s.seed = mix_seed(cfg.seed, 1);
    r = spsa_minimize(f, x0, s, hook);
  } else {
    SimplexConfig s = cfg.simplex;
    s.iters = cfg.max_iters;
    r = simplex_minimize(f, x0, s, hook);
  }
  out.params = r.x;
  out.energies = ansatz_energies(h, ansatz, r.x, cfg.k);
  out.cost = ssvqe_cost(out.energies, weights);
  out.objective_evaluations = r.evaluations;
  out.state_preparations = r.evaluations * per_eval;
  if (cfg.variant == SsvqeVariant::B) {
    out.estimates = {out.energies.back()};
  } else {
    out.estimates = out.energies;
  }
  return out;
}

/// Runs `seeds` independent restarts and keeps the lowest final cost.
inline SsvqeResult ssvqe_best_of(const PauliSum& h, SsvqeConfig cfg, const Ansatz& ansatz, int seeds) {
  if (seeds < 1) throw std::invalid_argument("ssvqe_best_of: need at least one seed");
  const std::uint64_t base = cfg.seed;
  SsvqeResult best;
  std::size_t evals = 0, preps = 0;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = base + static_cast<std::uint64_t>(s);
    auto r = ssvqe(h, cfg, ansatz);
    evals += r.objective_evaluations;
    preps += r.state_preparations;
    if (s == 0 || r.cost < best.cost) best = std::move(r);
  }
  // Counts cover every restart, since all of them ran.
  best.objective_evaluations = evals;
  best.state_preparations = preps;
  return best;
}

/// Sum of w_j * lambda_j over the exact spectrum: the floor of variant C's cost.
inline double ssvqe_cost_bound(const PauliSum& h, const std::vector<double>& weights) {
  const auto ev = eigenvalues(h.dense());
  double b = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) b += weights[j] * ev[j];
  return b;
}

}  // namespace quatro::mpmw
