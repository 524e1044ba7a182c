#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "quatro/walks/walk.hpp"

using namespace quatro;
using namespace quatro::walks;

namespace {

// Dense Kronecker build of a Pauli label, kept apart from PauliString.
Matrix kron_label(const std::string& label) {
  Matrix out = Matrix::Identity(1, 1);
  for (char c : label) {
    Matrix p(2, 2);
    if (c == 'I') p << 1, 0, 0, 1;
    if (c == 'X') p << 0, 1, 1, 0;
    if (c == 'Y') p << 0, cplx(0, -1), cplx(0, 1), 0;
    if (c == 'Z') p << 1, 0, 0, -1;
    Matrix k(out.rows() * 2, out.cols() * 2);
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) k.block(2 * i, 2 * j, 2, 2) = out(i, j) * p;
    out = k;
  }
  return out;
}

// exp(-iHt) by repeated squaring of a truncated series, independent of the eigensolver.
Matrix series_unitary(const Matrix& h, double t) {
  const int squarings = 8;
  const Matrix a = cplx(0, -t / (1 << squarings)) * h;
  Matrix term = Matrix::Identity(h.rows(), h.cols()), u = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    u += term;
  }
  for (int s = 0; s < squarings; ++s) u = u * u;
  return u;
}

}  // namespace

TEST(WalkHamiltonian, TridiagonalConstruction) {
  const Matrix h = walk_hamiltonian_dense({4, 0.0, 1.0, 1.0});
  Matrix expect(4, 4);
  expect << 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0;
  EXPECT_EQ(h, expect);
  EXPECT_THROW(walk_hamiltonian_dense({6, 0.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(walk_hamiltonian_dense({2, 0.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(walk_hamiltonian_dense({4, 0.0, 1.0, 0.0}), std::invalid_argument);
}

TEST(WalkHamiltonian, CalibratedGroundEnergy) {
  const auto ev = eigenvalues(walk_hamiltonian_dense(calibrated_walk_model()));
  EXPECT_NEAR(ev[0], kCalibratedGroundEnergy, 1e-9);
}

TEST(WalkHamiltonian, PauliCoefficientsMatchTraceOracle) {
  const Matrix h = walk_hamiltonian_dense(calibrated_walk_model());
  const auto sum = build_walk_hamiltonian(calibrated_walk_model());
  const char labels[4] = {'I', 'X', 'Y', 'Z'};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const std::string l = {labels[a], labels[b]};
      EXPECT_NEAR(sum.coeff(l), (kron_label(l) * h).trace().real() / 4.0, 1e-12) << l;
    }
  EXPECT_LT((sum.dense() - h).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReflectingWalk, ZeroCouplingIsStationary) {
  const WalkModel m{8, 0.7, 0.0, 1.0};
  const auto r = reflecting_walk(m, StateVector::basis(3, 5), 3);
  for (const auto& p : r.probabilities) EXPECT_NEAR(p[5], 1.0, 1e-12);
}

TEST(ReflectingWalk, StepZeroAndNormalization) {
  const WalkModel m;
  const auto psi0 = default_initial_state(8);
  const auto r = reflecting_walk(m, psi0, 6);
  ASSERT_EQ(r.timesteps(), 6u);
  EXPECT_EQ(r.probabilities[0], psi0.probabilities());
  for (double s : r.survival) EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_THROW(reflecting_walk(m, StateVector(2), 1), std::invalid_argument);
}

TEST(ReflectingWalk, MirrorSymmetryWithoutDrift) {
  const WalkModel m{8, 0.0, 1.0, 0.6};
  const auto r = reflecting_walk(m, default_initial_state(8), 5);
  for (const auto& p : r.probabilities)
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(7 - i)], 1e-12);
}

TEST(ReflectingWalk, MatchesMatrixPowerOracle) {
  const WalkModel m;
  const auto psi0 = default_initial_state(8);
  const auto r = reflecting_walk(m, psi0, 4);
  const Matrix u = series_unitary(walk_hamiltonian_dense(m), m.dt);
  Vector psi = psi0.amplitudes();
  for (int k = 1; k <= 4; ++k) {
    psi = u * psi;
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(r.probabilities[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)], std::norm(psi(i)), 1e-9);
  }
}

TEST(Detector, BoundaryAndInteriorStates) {
  const Circuit det = boundary_detector(3);
  auto anc_one = [&](const StateVector& main) {
    return measure_probs(apply_circuit(det, with_ancilla(main)), std::vector<int>{3})[1];
  };
  EXPECT_NEAR(anc_one(StateVector::basis(3, 0)), 0.0, 1e-15);
  EXPECT_NEAR(anc_one(StateVector::basis(3, 0b011)), 1.0, 1e-15);
  Vector cat = Vector::Zero(8);
  cat(0) = cat(7) = 1 / std::numbers::sqrt2;
  EXPECT_NEAR(anc_one(StateVector(3, cat)), 0.0, 1e-15);
  EXPECT_THROW(boundary_detector(1), std::invalid_argument);
}

TEST(Detector, PermutesBasisAndPreservesMainRegister) {
  for (int n = 2; n <= 4; ++n) {
    const Circuit det = boundary_detector(n);
    Circuit twice = det;
    twice.append(det);
    const int dim = 1 << (n + 1);
    for (int i = 0; i < dim; ++i) {
      const auto out = apply_circuit(det, StateVector::basis(n + 1, static_cast<std::uint64_t>(i)));
      const int main = i >> 1, anc = i & 1;
      const bool interior = main != 0 && main != (1 << n) - 1;
      const int expect = (main << 1) | (anc ^ (interior ? 1 : 0));
      EXPECT_NEAR(std::norm(out[static_cast<std::uint64_t>(expect)]), 1.0, 1e-12) << "n=" << n << " i=" << i;
      const auto back = apply_circuit(twice, StateVector::basis(n + 1, static_cast<std::uint64_t>(i)));
      EXPECT_NEAR(std::norm(back[static_cast<std::uint64_t>(i)]), 1.0, 1e-12);
    }
  }
}

TEST(AbsorbingWalk, OneStepEqualsReflecting) {
  const WalkModel m;
  const auto psi0 = default_initial_state(8);
  const auto a = absorbing_walk_exact(m, psi0, 1);
  const auto r = reflecting_walk(m, psi0, 1);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(a.probabilities[1][static_cast<std::size_t>(i)], r.probabilities[1][static_cast<std::size_t>(i)], 1e-12);
}

TEST(AbsorbingWalk, BoundaryStartSurvivalOracle) {
  const WalkModel m = calibrated_walk_model();
  const auto a = absorbing_walk_exact(m, StateVector::basis(2, 0), 2);
  // Direct 4x4 arithmetic: survival after step 2 is the interior mass of U|0>.
  const Matrix u = series_unitary(walk_hamiltonian_dense(m), m.dt);
  const double interior = std::norm(u(1, 0)) + std::norm(u(2, 0));
  EXPECT_NEAR(a.survival[2], interior, 1e-9);
}

TEST(AbsorbingWalk, SurvivalNonIncreasing) {
  const auto a = absorbing_walk_exact(WalkModel{}, default_initial_state(8), 8);
  for (std::size_t t = 1; t < a.survival.size(); ++t) EXPECT_LE(a.survival[t], a.survival[t - 1] + 1e-12);
  EXPECT_LT(a.survival.back(), 1.0);
}

TEST(AbsorbingWalk, NoiselessPostselectionMatchesExact) {
  const WalkModel m;
  const auto psi0 = default_initial_state(8);
  const auto exact = absorbing_walk_exact(m, psi0, 4);
  for (int t = 1; t <= 4; ++t) {
    const auto p = absorbing_walk_noisy(m, psi0, t, {}, 1, 0);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(p[static_cast<std::size_t>(i)], exact.probabilities[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)], 1e-10);
  }
}

TEST(AbsorbingWalk, SampledWithinBinomialBounds) {
  const WalkModel m;
  const auto psi0 = default_initial_state(8);
  const std::size_t shots = 20000;
  const auto exact = absorbing_walk_exact(m, psi0, 3);
  const auto sampled = absorbing_walk_sampled(m, psi0, 3, shots, 11);
  for (int t = 1; t <= 3; ++t) {
    for (int i = 0; i < 8; ++i) {
      const double p = exact.probabilities[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const double sd = std::sqrt(p * (1 - p) / shots);
      EXPECT_NEAR(sampled.probabilities[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)], p, 5 * sd + 1e-12);
    }
    // Accepted runs never observed a boundary hit, so their mass is the survival.
    EXPECT_NEAR(static_cast<double>(sampled.accepted[static_cast<std::size_t>(t)]) / shots, sampled.survival[static_cast<std::size_t>(t)], 1e-12);
  }
  EXPECT_EQ(sampled.probabilities, absorbing_walk_sampled(m, psi0, 3, shots, 11).probabilities);
  EXPECT_THROW(absorbing_walk_sampled(m, psi0, 3, 0, 11), std::invalid_argument);
}

TEST(AbsorbingWalk, CsvLayout) {
  std::ostringstream os;
  reflecting_walk(WalkModel{}, default_initial_state(8), 1).write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "timestep,state,probability");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 2 * 8);
}
