#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/state.hpp"

namespace quatro {

enum class GateKind { H, X, Y, Z, RX, RY, RZ, CNOT, Toffoli, CRX, Unitary, Measure, Reset };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::CNOT: return "cx";
    case GateKind::Toffoli: return "mcx";
    case GateKind::CRX: return "crx";
    case GateKind::Unitary: return "unitary";
    case GateKind::Measure: return "measure";
    case GateKind::Reset: return "reset";
  }
  return "?";
}

struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> controls;
  std::vector<int> targets;
  double theta = 0.0;
  Matrix matrix;  // only for GateKind::Unitary
  int clbit = -1; // only for GateKind::Measure

  static Gate of(GateKind k, std::vector<int> controls, std::vector<int> targets, double theta = 0.0) {
    Gate g;
    g.kind = k;
    g.controls = std::move(controls);
    g.targets = std::move(targets);
    g.theta = theta;
    return g;
  }

  bool is_unitary() const { return kind != GateKind::Measure && kind != GateKind::Reset; }

  std::vector<int> touched() const {
    std::vector<int> q = controls;
    q.insert(q.end(), targets.begin(), targets.end());
    return q;
  }

  // Matrix acting on `targets` (controls excluded), targets[0] most significant.
  Matrix target_matrix() const {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cplx i(0, 1);
    Matrix m(2, 2);
    switch (kind) {
      case GateKind::H: m << 1, 1, 1, -1; m /= std::numbers::sqrt2; break;
      case GateKind::X:
      case GateKind::CNOT:
      case GateKind::Toffoli: m << 0, 1, 1, 0; break;
      case GateKind::Y: m << 0, -i, i, 0; break;
      case GateKind::Z: m << 1, 0, 0, -1; break;
      case GateKind::RX:
      case GateKind::CRX: m << c, -i * s, -i * s, c; break;
      case GateKind::RY: m << c, -s, s, c; break;
      case GateKind::RZ: m << std::exp(-i * (theta / 2)), 0, 0, std::exp(i * (theta / 2)); break;
      case GateKind::Unitary: return matrix;
      default: throw std::logic_error("target_matrix: non-unitary operation");
    }
    return m;
  }
};

/// Ordered gate list over a fixed register, with a classical register for
/// mid-circuit measurements.
class Circuit {
 public:
  explicit Circuit(int n_qubits, int n_clbits = 0) : n_(n_qubits), n_clbits_(n_clbits) {
    if (n_qubits < 1) throw std::invalid_argument("Circuit: need at least one qubit");
  }

  int n_qubits() const { return n_; }
  int n_clbits() const { return n_clbits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  Circuit& h(int q) { return push(Gate::of(GateKind::H, {}, {q})); }
  Circuit& x(int q) { return push(Gate::of(GateKind::X, {}, {q})); }
  Circuit& y(int q) { return push(Gate::of(GateKind::Y, {}, {q})); }
  Circuit& z(int q) { return push(Gate::of(GateKind::Z, {}, {q})); }
  Circuit& rx(int q, double t) { return push(Gate::of(GateKind::RX, {}, {q}, t)); }
  Circuit& ry(int q, double t) { return push(Gate::of(GateKind::RY, {}, {q}, t)); }
  Circuit& rz(int q, double t) { return push(Gate::of(GateKind::RZ, {}, {q}, t)); }
  Circuit& cx(int c, int t) { return push(Gate::of(GateKind::CNOT, {c}, {t})); }
  Circuit& crx(int c, int t, double theta) { return push(Gate::of(GateKind::CRX, {c}, {t}, theta)); }

  // Multi-controlled X; two controls is the Toffoli gate.
  Circuit& mcx(std::vector<int> controls, int t) {
    if (controls.size() == 1) return cx(controls[0], t);
    return push(Gate::of(GateKind::Toffoli, std::move(controls), {t}));
  }
  Circuit& ccx(int c1, int c2, int t) { return mcx({c1, c2}, t); }

  Circuit& unitary(std::vector<int> targets, Matrix u) {
    const auto dim = static_cast<Eigen::Index>(1ULL << targets.size());
    if (u.rows() != dim || u.cols() != dim) throw std::invalid_argument("Circuit::unitary: matrix size does not match targets");
    if ((u.adjoint() * u - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument("Circuit::unitary: matrix is not unitary");
    }
    Gate g = Gate::of(GateKind::Unitary, {}, std::move(targets));
    g.matrix = std::move(u);
    return push(std::move(g));
  }

  Circuit& measure(int q, int clbit) {
    if (clbit < 0 || clbit >= n_clbits_) throw std::out_of_range("Circuit::measure: clbit out of range");
    Gate g = Gate::of(GateKind::Measure, {}, {q});
    g.clbit = clbit;
    return push(std::move(g));
  }
  Circuit& reset(int q) { return push(Gate::of(GateKind::Reset, {}, {q})); }

  Circuit& append(const Circuit& other) {
    if (other.n_ != n_) throw std::invalid_argument("Circuit::append: register size mismatch");
    for (const auto& g : other.gates_) push(g);
    return *this;
  }

  bool is_unitary() const {
    return std::all_of(gates_.begin(), gates_.end(), [](const Gate& g) { return g.is_unitary(); });
  }

  std::map<std::string, std::size_t> gate_counts() const {
    std::map<std::string, std::size_t> m;
    for (const auto& g : gates_) ++m[gate_name(g.kind)];
    return m;
  }

  // Circuit depth as constructed: greedy layering by qubit occupancy.
  std::size_t depth() const {
    std::vector<std::size_t> level(static_cast<std::size_t>(n_), 0);
    std::size_t d = 0;
    for (const auto& g : gates_) {
      std::size_t l = 0;
      for (int q : g.touched()) l = std::max(l, level[static_cast<std::size_t>(q)]);
      for (int q : g.touched()) level[static_cast<std::size_t>(q)] = l + 1;
      d = std::max(d, l + 1);
    }
    return d;
  }

 private:
  Circuit& push(Gate g) {
    std::set<int> seen;
    for (int q : g.touched()) {
      if (q < 0 || q >= n_) throw std::out_of_range("Circuit: qubit index " + std::to_string(q) + " out of range");
      if (!seen.insert(q).second) throw std::invalid_argument("Circuit: controls and targets must be distinct");
    }
    if (g.targets.empty()) throw std::invalid_argument("Circuit: gate without targets");
    gates_.push_back(std::move(g));
    return *this;
  }

  int n_;
  int n_clbits_;
  std::vector<Gate> gates_;
};

namespace detail {

inline std::uint64_t qubit_mask(int q, int n) { return 1ULL << (n - 1 - q); }

// Applies `m` to `targets` of amps, conditioned on all `controls` being 1.
inline void apply_matrix(Vector& amps, int n, const std::vector<int>& controls, const std::vector<int>& targets,
                         const Matrix& m) {
  const int k = static_cast<int>(targets.size());
  const std::uint64_t sub = 1ULL << k;
  std::uint64_t cmask = 0, tmask = 0;
  for (int c : controls) cmask |= qubit_mask(c, n);
  for (int t : targets) tmask |= qubit_mask(t, n);
  const auto dim = static_cast<std::uint64_t>(amps.size());
  if (k == 1) {
    // Hot path for single-target gates: no temporaries.
    const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
    for (std::uint64_t base = 0; base < dim; ++base) {
      if ((base & tmask) != 0 || (base & cmask) != cmask) continue;
      cplx& a0 = amps(static_cast<Eigen::Index>(base));
      cplx& a1 = amps(static_cast<Eigen::Index>(base | tmask));
      const cplx x0 = a0, x1 = a1;
      a0 = m00 * x0 + m01 * x1;
      a1 = m10 * x0 + m11 * x1;
    }
    return;
  }
  std::vector<std::uint64_t> offset(sub);
  for (std::uint64_t s = 0; s < sub; ++s) {
    std::uint64_t off = 0;
    for (int b = 0; b < k; ++b) {
      if ((s >> (k - 1 - b)) & 1U) off |= qubit_mask(targets[static_cast<std::size_t>(b)], n);
    }
    offset[s] = off;
  }
  Vector in(static_cast<Eigen::Index>(sub));
  for (std::uint64_t base = 0; base < dim; ++base) {
    if ((base & tmask) != 0 || (base & cmask) != cmask) continue;
    for (std::uint64_t s = 0; s < sub; ++s) in(static_cast<Eigen::Index>(s)) = amps(static_cast<Eigen::Index>(base | offset[s]));
    const Vector out = m * in;
    for (std::uint64_t s = 0; s < sub; ++s) amps(static_cast<Eigen::Index>(base | offset[s])) = out(static_cast<Eigen::Index>(s));
  }
}

inline double prob_one(const Vector& amps, int q, int n) {
  const std::uint64_t mask = qubit_mask(q, n);
  double p = 0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (static_cast<std::uint64_t>(i) & mask) p += std::norm(amps(i));
  }
  return p;
}

// Zeroes the branch of qubit q that disagrees with `outcome`.
inline void project(Vector& amps, int q, int n, int outcome) {
  const std::uint64_t mask = qubit_mask(q, n);
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const int bit = (static_cast<std::uint64_t>(i) & mask) ? 1 : 0;
    if (bit != outcome) amps(i) = 0;
  }
}

}  // namespace detail

inline void apply_gate(StateVector& psi, const Gate& g) {
  if (!g.is_unitary()) throw std::invalid_argument("apply_gate: measurement/reset needs a trajectory runner");
  detail::apply_matrix(psi.amplitudes(), psi.n_qubits(), g.controls, g.targets, g.target_matrix());
}

/// Applies a unitary circuit to a state.
inline StateVector apply_circuit(const Circuit& c, StateVector psi) {
  if (c.n_qubits() != psi.n_qubits()) {
    throw std::invalid_argument("apply_circuit: circuit has " + std::to_string(c.n_qubits()) +
                                " qubits, state has " + std::to_string(psi.n_qubits()));
  }
  for (const auto& g : c.gates()) apply_gate(psi, g);
  return psi;
}

}  // namespace quatro
