#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "quatro/qcore/circuit.hpp"
#include "quatro/qcore/evolve.hpp"
#include "quatro/qcore/noise.hpp"
#include "quatro/qcore/pauli.hpp"
#include "quatro/qcore/state.hpp"
#include "test_util.hpp"

using namespace quatro;
using quatro::testing::random_hermitian;
using quatro::testing::random_state;

namespace {

// Kronecker-product construction, independent of PauliString's bit tricks.
Matrix kron_pauli(const std::string& label) {
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

Matrix taylor_exp(const Matrix& h, double t) {
  const Matrix a = cplx(0, -t) * h;
  Matrix term = Matrix::Identity(h.rows(), h.cols());
  Matrix sum = term;
  for (int k = 1; k < 200; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return sum;
}

}  // namespace

TEST(Pauli, DenseMatchesKroneckerProduct) {
  for (const std::string label : {"X", "Y", "Z", "XY", "ZYX", "IYZI"}) {
    EXPECT_LT((PauliString(label).dense() - kron_pauli(label)).cwiseAbs().maxCoeff(), 1e-15) << label;
  }
}

TEST(Pauli, DecomposeIdentityAndZ) {
  const auto id = pauli_decompose(Matrix::Identity(2, 2));
  ASSERT_EQ(id.size(), 1u);
  EXPECT_DOUBLE_EQ(id.coeff("I"), 1.0);

  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  const auto zs = pauli_decompose(z);
  ASSERT_EQ(zs.size(), 1u);
  EXPECT_DOUBLE_EQ(zs.coeff("Z"), 1.0);
}

TEST(Pauli, DecomposeMatchesTraceOracle) {
  const Matrix h = random_hermitian(8, 11);
  const auto sum = pauli_decompose(h);
  const char labels[4] = {'I', 'X', 'Y', 'Z'};
  for (int code = 0; code < 64; ++code) {
    std::string l = {labels[(code >> 4) & 3], labels[(code >> 2) & 3], labels[code & 3]};
    const double expect = (kron_pauli(l) * h).trace().real() / 8.0;
    EXPECT_NEAR(sum.coeff(l), expect, 1e-12) << l;
  }
}

TEST(Pauli, RoundTripProperty) {
  for (int n = 1; n <= 4; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Matrix h = random_hermitian(1 << n, 100 * n + seed);
      const Matrix back = pauli_decompose(h).dense();
      EXPECT_LT((back - h).cwiseAbs().maxCoeff(), 1e-10) << "n=" << n << " seed=" << seed;
    }
  }
}

TEST(Pauli, DecomposeRejectsBadInput) {
  Matrix nh(2, 2);
  nh << 0, 1, 0, 0;
  EXPECT_THROW(pauli_decompose(nh), std::invalid_argument);
  EXPECT_THROW(pauli_decompose(Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST(Pauli, SumInvariants) {
  PauliSum s(2);
  s.add("XZ", 0.5).add("XZ", -0.5);
  EXPECT_TRUE(s.empty());
  EXPECT_THROW(s.add("XZI", 1.0), std::invalid_argument);
  EXPECT_THROW(s.add("XQ", 1.0), std::invalid_argument);
  s.add("ZZ", 1.5).add("IX", -2.0);
  const auto back = PauliSum::from_json(s.to_json());
  EXPECT_EQ(back.terms(), s.terms());
  EXPECT_EQ(s.to_json()["terms"][0]["pauli"], "IX");
}

TEST(Pauli, ExpectationMatchesDenseQuadraticForm) {
  const Matrix h = random_hermitian(16, 5);
  const auto sum = pauli_decompose(h);
  const Vector psi = random_state(16, 6);
  EXPECT_NEAR(sum.expectation(psi), (psi.adjoint() * h * psi)(0).real(), 1e-9);
}

TEST(Evolve, ZeroTimeIsIdentity) {
  const StateVector psi(3, random_state(8, 1));
  const auto out = evolve(random_hermitian(8, 2), 0.0, psi);
  EXPECT_LT((out.amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(Evolve, EigenstatePicksUpPhase) {
  PauliSum z(1);
  z.add("Z", 1.0);
  const auto out = evolve(z, 0.8, StateVector(1));
  EXPECT_NEAR(std::abs(out[0] - std::exp(cplx(0, -0.8))), 0.0, 1e-12);
  EXPECT_NEAR(std::norm(out[1]), 0.0, 1e-24);
}

TEST(Evolve, MatchesTaylorSeriesOracle) {
  const Matrix h = random_hermitian(8, 42);
  const StateVector psi(3, random_state(8, 43));
  const auto out = evolve(h, 0.7, psi);
  const Vector expect = taylor_exp(h, 0.7) * psi.amplitudes();
  EXPECT_LT((out.amplitudes() - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, NormAndLinearityInTime) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix h = random_hermitian(16, seed);
    const StateVector psi(4, random_state(16, seed + 50));
    const auto a = evolve(h, 1.3, psi);
    const auto b = evolve(h, 0.9, evolve(h, 0.4, psi));
    EXPECT_NEAR(a.norm_squared(), 1.0, 1e-10);
    EXPECT_LT((a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Evolve, DimensionMismatch) {
  EXPECT_THROW(evolve(random_hermitian(4, 1), 1.0, StateVector(3)), std::invalid_argument);
}

TEST(Circuit, EmptyCircuitAndHadamard) {
  const StateVector psi(2, random_state(4, 9));
  EXPECT_LT((apply_circuit(Circuit(2), psi).amplitudes() - psi.amplitudes()).norm(), 1e-15);

  Circuit c(1);
  c.h(0);
  const auto out = apply_circuit(c, StateVector(1));
  EXPECT_NEAR(out[0].real(), 1 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(out[1].real(), 1 / std::numbers::sqrt2, 1e-15);
}

TEST(Circuit, GatesMatchKroneckerConstruction) {
  Circuit c(3);
  c.ry(0, 0.3).crx(0, 2, 1.1).rz(1, -0.4).ccx(0, 1, 2).cx(2, 0).h(1).rx(2, 0.2);
  const Vector psi = random_state(8, 77);
  const auto out = apply_circuit(c, StateVector(3, psi));
  EXPECT_NEAR(out.norm_squared(), 1.0, 1e-10);

  // Same circuit built as a dense product of 8x8 operators.
  auto one = [](int q, const Matrix& u) {
    Matrix m = Matrix::Identity(1, 1);
    for (int k = 0; k < 3; ++k) {
      const Matrix f = (k == q) ? u : Matrix(Matrix::Identity(2, 2));
      Matrix r(m.rows() * 2, m.cols() * 2);
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r.block(2 * i, 2 * j, 2, 2) = m(i, j) * f;
      m = r;
    }
    return m;
  };
  auto controlled = [](std::vector<int> ctrl, int t, const Matrix& u) {
    Matrix m = Matrix::Zero(8, 8);
    for (int j = 0; j < 8; ++j) {
      bool on = true;
      for (int c : ctrl) on = on && ((j >> (2 - c)) & 1);
      if (!on) {
        m(j, j) = 1;
        continue;
      }
      const int b = (j >> (2 - t)) & 1;
      for (int nb = 0; nb < 2; ++nb) {
        const int i = (j & ~(1 << (2 - t))) | (nb << (2 - t));
        m(i, j) = u(nb, b);
      }
    }
    return m;
  };
  Matrix ry(2, 2), rx(2, 2), rz(2, 2), h(2, 2), x(2, 2);
  auto RX = [](double t) { Matrix m(2, 2); m << std::cos(t / 2), cplx(0, -std::sin(t / 2)), cplx(0, -std::sin(t / 2)), std::cos(t / 2); return m; };
  ry << std::cos(0.15), -std::sin(0.15), std::sin(0.15), std::cos(0.15);
  rz << std::exp(cplx(0, 0.2)), 0, 0, std::exp(cplx(0, -0.2));
  h << 1, 1, 1, -1;
  h /= std::numbers::sqrt2;
  x << 0, 1, 1, 0;
  const Matrix u = one(2, RX(0.2)) * one(1, h) * controlled({2}, 0, x) * controlled({0, 1}, 2, x) * one(1, rz) *
                   controlled({0}, 2, RX(1.1)) * one(0, ry);
  EXPECT_LT((out.amplitudes() - u * psi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Circuit, IndexValidation) {
  Circuit c(2);
  EXPECT_THROW(c.h(2), std::out_of_range);
  EXPECT_THROW(c.cx(1, 1), std::invalid_argument);
  EXPECT_THROW(c.ccx(0, 1, 1), std::invalid_argument);
  EXPECT_THROW(apply_circuit(c, StateVector(3)), std::invalid_argument);
}

TEST(Measure, MarginalsAndErrors) {
  const auto p00 = measure_probs_table(StateVector(2), std::vector<int>{0, 1});
  ASSERT_EQ(p00.size(), 1u);
  EXPECT_DOUBLE_EQ(p00.at("00"), 1.0);

  Circuit bell(2);
  bell.h(0).cx(0, 1);
  const auto psi = apply_circuit(bell, StateVector(2));
  const auto m = measure_probs(psi, std::vector<int>{0});
  EXPECT_NEAR(m[0], 0.5, 1e-12);
  EXPECT_NEAR(m[1], 0.5, 1e-12);
  EXPECT_THROW(measure_probs(psi, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(measure_probs(psi, std::vector<int>{0, 0}), std::invalid_argument);
  EXPECT_THROW(measure_probs(psi, std::vector<int>{2}), std::out_of_range);
}

TEST(Measure, MarginalMatchesDirectAmplitudes) {
  const StateVector psi(3, random_state(8, 3));
  const auto m = measure_probs(psi, std::vector<int>{2, 0});
  for (int key = 0; key < 4; ++key) {
    double expect = 0;
    for (int i = 0; i < 8; ++i) {
      const int q0 = (i >> 2) & 1, q2 = i & 1;
      if (((q2 << 1) | q0) == key) expect += std::norm(psi[static_cast<std::uint64_t>(i)]);
    }
    EXPECT_NEAR(m[static_cast<std::size_t>(key)], expect, 1e-12);
  }
}

TEST(Sample, DeterministicStateAndSeed) {
  const auto c = sample(StateVector::basis(3, 0b101), 100, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.at("101"), 100u);

  Circuit plus(1);
  plus.h(0);
  const auto psi = apply_circuit(plus, StateVector(1));
  const std::size_t shots = 100000;
  const auto u = sample(psi, shots, 7);
  const double sd = std::sqrt(0.25 / shots);
  EXPECT_NEAR(static_cast<double>(u.at("0")) / shots, 0.5, 5 * sd);
  EXPECT_EQ(u, sample(psi, shots, 7));
  EXPECT_THROW(sample(psi, 0, 1), std::invalid_argument);
}

TEST(Noise, ZeroNoiseEqualsIdealSampling) {
  Circuit c(3);
  c.h(0).cx(0, 1).ry(2, 0.7).ccx(0, 2, 1);
  const auto noisy = run_noisy(c, {}, 20000, 5);
  const auto ideal = measure_probs_table(apply_circuit(c, StateVector(3)), std::vector<int>{0, 1, 2});
  for (const auto& [k, p] : ideal) {
    const double sd = std::sqrt(p * (1 - p) / 20000);
    EXPECT_NEAR(static_cast<double>(noisy.count(k) ? noisy.at(k) : 0) / 20000, p, 5 * sd + 1e-12) << k;
  }
  // Same seed: same trajectories.
  EXPECT_EQ(noisy, run_noisy(c, {}, 20000, 5));
}

TEST(Noise, FullDepolarizingGivesMaximallyMixedMarginal) {
  // Averaging P rho P over all 4^k Paulis gives I / 2^k on the touched qubits.
  const std::size_t shots = 100000;
  Circuit one(2);
  one.x(0);
  const auto c1 = run_noisy(one, {1.0, 1.0}, shots, 3);
  const double sd = std::sqrt(0.25 / shots);
  EXPECT_NEAR(static_cast<double>(c1.at("10")) / shots, 0.5, 5 * sd);
  EXPECT_NEAR(static_cast<double>(c1.at("00")) / shots, 0.5, 5 * sd);
  EXPECT_EQ(c1.count("01") + c1.count("11"), 0u);

  Circuit two(2);
  two.cx(0, 1);
  const auto c2 = run_noisy(two, {1.0, 1.0}, shots, 4);
  const double sd4 = std::sqrt(0.25 * 0.75 / shots);
  for (const char* k : {"00", "01", "10", "11"}) EXPECT_NEAR(static_cast<double>(c2.at(k)) / shots, 0.25, 5 * sd4) << k;
  EXPECT_THROW(run_noisy(two, {1.5, 0.0}, 10, 1), std::invalid_argument);
}

TEST(Noise, MidCircuitMeasurementCollapses) {
  Circuit c(2, 1);
  c.h(0).cx(0, 1).measure(1, 0);
  const auto shots = run_shots(c, StateVector(2), {}, 2000, 9);
  for (const auto& s : shots) {
    // Bell pair: the final state agrees with the recorded clbit.
    EXPECT_EQ(s.outcome, s.clbits == "1" ? 3u : 0u);
  }
  EXPECT_THROW(apply_circuit(c, StateVector(2)), std::invalid_argument);
}
