#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "quatro/qcore/state.hpp"

namespace quatro {

/// Spectral data of a Hermitian matrix, eigenvalues ascending.
struct Spectrum {
  Eigen::VectorXd values;
  Matrix vectors;
};

inline Spectrum spectrum(const Matrix& h) {
  require_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline std::vector<double> eigenvalues(const Matrix& h) {
  const auto s = spectrum(h);
  return {s.values.data(), s.values.data() + s.values.size()};
}

// f(H) = V f(Lambda) V^dagger for a scalar function of the eigenvalues.
template <typename F>
Matrix spectral_function(const Spectrum& s, F&& f) {
  const auto n = s.values.size();
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = f(s.values(i));
  return s.vectors * d.asDiagonal() * s.vectors.adjoint();
}

/// U = exp(-i H t).
inline Matrix time_evolution_operator(const Matrix& h, double t) {
  return spectral_function(spectrum(h), [t](double e) { return std::exp(cplx(0, -e * t)); });
}

/// exp(-tau H), the (non-unitary) imaginary-time propagator.
inline Matrix imaginary_time_operator(const Matrix& h, double tau) {
  return spectral_function(spectrum(h), [tau](double e) { return cplx(std::exp(-e * tau), 0); });
}

inline StateVector evolve(const Matrix& h, double t, const StateVector& psi) {
  if (h.rows() != psi.dim()) {
    throw std::invalid_argument("evolve: Hamiltonian dimension " + std::to_string(h.rows()) +
                                " does not match state dimension " + std::to_string(psi.dim()));
  }
  if (t == 0.0) return psi;
  return StateVector(psi.n_qubits(), time_evolution_operator(h, t) * psi.amplitudes());
}

inline StateVector evolve(const PauliSum& h, double t, const StateVector& psi) {
  if (h.n_qubits() != psi.n_qubits()) throw std::invalid_argument("evolve: register size mismatch");
  return evolve(h.dense(), t, psi);
}

}  // namespace quatro
