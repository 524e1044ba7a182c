#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/circuit.hpp"

namespace quatro::mpmw {

/// Hardware-efficient ansatz: each layer is RY on every qubit followed by a
/// ring of controlled-RX gates (i -> i+1 mod n). Parameters per layer: 2n.
struct Ansatz {
  int n_qubits = 2;
  int depth = 3;

  void validate() const {
    if (n_qubits < 2) throw std::invalid_argument("Ansatz: need at least 2 qubits");
    if (depth < 1) throw std::invalid_argument("Ansatz: depth must be >= 1");
  }
  std::size_t n_params() const { return static_cast<std::size_t>(depth * 2 * n_qubits); }

  Circuit circuit(const std::vector<double>& theta) const {
    validate();
    if (theta.size() != n_params()) {
      throw std::invalid_argument("Ansatz: expected " + std::to_string(n_params()) + " parameters, got " +
                                  std::to_string(theta.size()));
    }
    Circuit c(n_qubits);
    std::size_t p = 0;
    for (int l = 0; l < depth; ++l) {
      for (int q = 0; q < n_qubits; ++q) c.ry(q, theta[p++]);
      for (int q = 0; q < n_qubits; ++q) c.crx(q, (q + 1) % n_qubits, theta[p++]);
    }
    return c;
  }

  // Column j is the ansatz output on basis input |j>.
  Matrix unitary(const std::vector<double>& theta) const {
    const Circuit c = circuit(theta);
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    Matrix u(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      u.col(j) = apply_circuit(c, StateVector::basis(n_qubits, static_cast<std::uint64_t>(j))).amplitudes();
    }
    return u;
  }

  StateVector state(const std::vector<double>& theta, std::uint64_t input) const {
    return apply_circuit(circuit(theta), StateVector::basis(n_qubits, input));
  }
};

}  // namespace quatro::mpmw
