#pragma once

#include <complex>
#include <cstdint>

#include "quatro/qcore/pauli.hpp"
#include "quatro/qcore/rng.hpp"

namespace quatro::testing {

inline Matrix random_hermitian(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return (a + a.adjoint()) / 2.0;
}

inline Vector random_state(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return v / v.norm();
}

}  // namespace quatro::testing
