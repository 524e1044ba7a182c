#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/evolve.hpp"

namespace quatro::mpmw {

enum class QitePropagator {
  exact,        // normalized exp(-dtau H)|psi>
  first_order,  // normalized (1 - dtau H)|psi>
};

struct QiteConfig {
  double dtau = 0.2;
  int steps = 135;
  std::vector<std::string> pool;  // empty: every Pauli string on the register
  double regularization = 1e-6;
  QitePropagator propagator = QitePropagator::exact;

  void validate() const {
    if (!(dtau > 0.0)) throw std::invalid_argument("QiteConfig: dtau must be positive");
    if (steps < 1) throw std::invalid_argument("QiteConfig: steps must be >= 1");
    if (regularization < 0.0) throw std::invalid_argument("QiteConfig: regularization must be >= 0");
  }
};

struct QiteResult {
  std::vector<StateVector> states;  // steps + 1 entries, the start first
  std::vector<double> energies;
  std::size_t evaluations = 0;  // one state preparation per step
};

inline std::vector<std::string> all_pauli_strings(int n) {
  static constexpr char kLabels[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> out;
  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::string l(static_cast<std::size_t>(n), 'I');
    for (int q = 0; q < n; ++q) l[static_cast<std::size_t>(q)] = kLabels[(code >> (2 * (n - 1 - q))) & 3U];
    out.push_back(std::move(l));
  }
  return out;
}

/// Imaginary-time evolution by unitary fitting: each step solves
/// (M + reg I) a = -b with M_IJ = Re<v_I|v_J>, b_I = Re<v_I|delta>, v_I = i P_I psi,
/// delta = (target - psi)/dtau, then applies exp(-i dtau sum a_I P_I).
inline QiteResult qite_evolve(const PauliSum& h, const StateVector& psi0, const QiteConfig& cfg) {
  cfg.validate();
  if (h.n_qubits() != psi0.n_qubits()) throw std::invalid_argument("qite_evolve: register size mismatch");
  if (!psi0.is_normalized(1e-8)) throw std::invalid_argument("qite_evolve: initial state is not normalized");
  const int n = h.n_qubits();
  const auto labels = cfg.pool.empty() ? all_pauli_strings(n) : cfg.pool;
  std::vector<PauliString> pool;
  std::vector<Matrix> dense;
  for (const auto& l : labels) {
    if (static_cast<int>(l.size()) != n) throw std::invalid_argument("qite_evolve: pool string " + l + " has the wrong length");
    pool.emplace_back(l);
    dense.push_back(pool.back().dense());
  }
  const Matrix hd = h.dense();
  const Matrix step_op = cfg.propagator == QitePropagator::exact
                             ? imaginary_time_operator(hd, cfg.dtau)
                             : Matrix(Matrix::Identity(hd.rows(), hd.cols()) - cfg.dtau * hd);

  QiteResult out;
  Vector psi = psi0.amplitudes();
  out.states.push_back(psi0);
  out.energies.push_back(h.expectation(psi));
  const auto m = static_cast<Eigen::Index>(pool.size());
  for (int s = 0; s < cfg.steps; ++s) {
    Vector target = step_op * psi;
    const double nrm = target.norm();
    if (!(nrm > 1e-300)) {
      throw std::runtime_error("qite_evolve: imaginary-time state vanished; the start is orthogonal to every surviving eigenvector");
    }
    target /= nrm;
    const Vector delta = (target - psi) / cfg.dtau;
    Matrix v(psi.size(), m);
    for (Eigen::Index i = 0; i < m; ++i) v.col(i) = cplx(0, 1) * pool[static_cast<std::size_t>(i)].apply(psi);
    const Eigen::MatrixXd mm = (v.adjoint() * v).real() + cfg.regularization * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd b = (v.adjoint() * delta).real();
    const Eigen::VectorXd a = -mm.completeOrthogonalDecomposition().solve(b);
    Matrix gen = Matrix::Zero(hd.rows(), hd.cols());
    for (Eigen::Index i = 0; i < m; ++i) gen += a(i) * dense[static_cast<std::size_t>(i)];
    psi = time_evolution_operator(gen, cfg.dtau) * psi;
    psi.normalize();
    out.states.emplace_back(n, psi);
    out.energies.push_back(h.expectation(psi));
    ++out.evaluations;
  }
  return out;
}

}  // namespace quatro::mpmw
