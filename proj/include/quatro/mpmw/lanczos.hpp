#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "quatro/qcore/state.hpp"

namespace quatro::mpmw {

struct LanczosConfig {
  int k = 2;               // returns k+1 estimates
  int n_states = 0;        // subspace size; 0 means k+2 (capped by the trajectory)
  int stride = 1;          // take every stride-th trajectory state
  double svd_cutoff = 1e-8;  // relative to the largest overlap eigenvalue
};

/// Subspace diagonalization over imaginary-time states: S_ij = <psi_i|psi_j>,
/// T_ij = <psi_i|H|psi_j>. Directions of S below the cutoff are dropped and
/// the reduced problem T x = E S x is solved.
inline std::vector<double> quantum_lanczos(const PauliSum& h, const std::vector<StateVector>& trajectory,
                                           const LanczosConfig& cfg) {
  if (cfg.k < 0 || cfg.stride < 1 || cfg.svd_cutoff < 0) throw std::invalid_argument("quantum_lanczos: bad configuration");
  const std::size_t want = static_cast<std::size_t>(cfg.n_states > 0 ? cfg.n_states : cfg.k + 2);
  std::vector<const StateVector*> basis;
  for (std::size_t i = 0; i < trajectory.size() && basis.size() < want; i += static_cast<std::size_t>(cfg.stride)) {
    basis.push_back(&trajectory[i]);
  }
  if (static_cast<int>(basis.size()) < cfg.k + 1) {
    throw std::invalid_argument("quantum_lanczos: trajectory provides " + std::to_string(basis.size()) +
                                " states, need at least " + std::to_string(cfg.k + 1));
  }
  const auto m = static_cast<Eigen::Index>(basis.size());
  Matrix s(m, m), t(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector hi = h.apply(basis[static_cast<std::size_t>(i)]->amplitudes());
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vector& bj = basis[static_cast<std::size_t>(j)]->amplitudes();
      s(i, j) = basis[static_cast<std::size_t>(i)]->amplitudes().dot(bj);
      t(i, j) = hi.dot(bj);
    }
  }
  s = (s + s.adjoint()).eval() / 2.0;
  t = (t + t.adjoint()).eval() / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (es.eigenvalues()(i) > cfg.svd_cutoff * top) keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) < cfg.k + 1) {
    throw std::runtime_error("quantum_lanczos: subspace rank " + std::to_string(keep.size()) + " after cutoff is below " +
                             std::to_string(cfg.k + 1));
  }
  Matrix x(m, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    x.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()(keep[c]));
  }
  const Matrix reduced = x.adjoint() * t * x;
  Eigen::SelfAdjointEigenSolver<Matrix> rs((reduced + reduced.adjoint()) / 2.0);
  std::vector<double> out;
  for (int j = 0; j <= cfg.k; ++j) out.push_back(rs.eigenvalues()(j));
  return out;
}

}  // namespace quatro::mpmw
