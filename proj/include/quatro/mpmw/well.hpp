#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/pauli.hpp"

namespace quatro::mpmw {

/// Particle in a box discretized on n_positions grid points.
struct WellModel {
  int n_positions = 4;
  double dx = 1.0 / 3.0;
  std::vector<double> potential;  // empty means zero everywhere

  void validate() const {
    if (n_positions < 2 || !is_power_of_two(static_cast<std::size_t>(n_positions))) {
      throw std::invalid_argument("WellModel: n_positions must be a power of two >= 2, got " + std::to_string(n_positions));
    }
    if (!(dx > 0.0)) throw std::invalid_argument("WellModel: dx must be positive");
    if (!potential.empty() && static_cast<int>(potential.size()) != n_positions) {
      throw std::invalid_argument("WellModel: potential has " + std::to_string(potential.size()) + " entries for " +
                                  std::to_string(n_positions) + " positions");
    }
  }
  int n_qubits() const { return log2_exact(static_cast<std::size_t>(n_positions)); }
};

/// (1 / 2dx^2)(2I - shift - shift^T) + diag(V), with walls outside the grid.
inline Matrix build_well_dense(const WellModel& w) {
  w.validate();
  const int n = w.n_positions;
  const double t = 1.0 / (2.0 * w.dx * w.dx);
  Matrix h = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = 2.0 * t + (w.potential.empty() ? 0.0 : w.potential[static_cast<std::size_t>(i)]);
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -t;
  }
  return h;
}

inline PauliSum build_well_hamiltonian(const WellModel& w) { return pauli_decompose(build_well_dense(w)); }

}  // namespace quatro::mpmw
