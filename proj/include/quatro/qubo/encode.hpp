#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/pauli.hpp"
#include "quatro/qubo/poly.hpp"

namespace quatro::qubo {

/// r bits per real amplitude: one sign bit followed by r-1 magnitude bits
/// (most significant first). Magnitude q in [0, 2^(r-1)-1] decodes to
/// q / (2^(r-1)-1), so the grid spans [-1, 1] inclusive.
struct AmplitudeEncoding {
  int n_states = 0;
  int r = 2;

  AmplitudeEncoding() = default;
  AmplitudeEncoding(int n, int bits) : n_states(n), r(bits) { validate(); }

  void validate() const {
    if (n_states < 1) throw std::invalid_argument("AmplitudeEncoding: need at least one state");
    if (r < 2 || r > 16) throw std::invalid_argument("AmplitudeEncoding: r must lie in [2, 16]");
  }

  int n_vars() const { return n_states * r; }
  int sign_var(int i) const { return i * r; }
  int magnitude_var(int i, int k) const { return i * r + 1 + k; }
  double scale() const { return 1.0 / static_cast<double>((1 << (r - 1)) - 1); }
  // Weight of magnitude bit k (k = 0 is the most significant).
  double weight(int k) const { return static_cast<double>(1 << (r - 2 - k)) * scale(); }

  // a_i as a polynomial: (1 - 2 s_i) * sum_k w_k q_ik.
  PseudoBooleanPoly amplitude(int i) const {
    PseudoBooleanPoly a(n_vars());
    for (int k = 0; k < r - 1; ++k) {
      a.add({magnitude_var(i, k)}, weight(k));
      a.add({sign_var(i), magnitude_var(i, k)}, -2.0 * weight(k));
    }
    return a;
  }

  std::vector<double> decode(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) < n_vars()) throw std::invalid_argument("AmplitudeEncoding::decode: too few bits");
    std::vector<double> a(static_cast<std::size_t>(n_states));
    for (int i = 0; i < n_states; ++i) {
      double m = 0;
      for (int k = 0; k < r - 1; ++k) {
        if (bits[static_cast<std::size_t>(magnitude_var(i, k))]) m += weight(k);
      }
      a[static_cast<std::size_t>(i)] = bits[static_cast<std::size_t>(sign_var(i))] ? -m : m;
    }
    return a;
  }
};

// Largest absolute row sum: bounds |eigenvalue| of h.
inline double gershgorin_bound(const Matrix& h) {
  double b = 0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) b = std::max(b, h.row(i).cwiseAbs().sum());
  return b;
}

inline Eigen::MatrixXd real_hamiltonian(const PauliSum& h) {
  for (const auto& [label, c] : h.terms()) {
    const auto ny = std::count(label.begin(), label.end(), 'Y');
    if (ny % 2 == 1) {
      throw std::invalid_argument("encode: term " + label + " has an odd number of Y factors, so the Hamiltonian has " +
                                  "imaginary matrix elements that real amplitudes cannot represent");
    }
  }
  return h.dense().real();
}

inline double default_encoding_penalty(const PauliSum& h) { return 2.0 * gershgorin_bound(h.dense()); }

/// a^T H a + penalty * (|a|^2 - 1)^2 over the fixed-point amplitudes a(b).
inline PseudoBooleanPoly encode_ground_state_problem(const PauliSum& h, const AmplitudeEncoding& enc, double penalty) {
  enc.validate();
  const Eigen::MatrixXd hr = real_hamiltonian(h);
  if (hr.rows() != enc.n_states) {
    throw std::invalid_argument("encode: Hamiltonian dimension " + std::to_string(hr.rows()) + " does not match " +
                                std::to_string(enc.n_states) + " encoded states");
  }
  if (!(penalty > 0.0)) throw std::invalid_argument("encode: penalty must be positive");
  std::vector<PseudoBooleanPoly> a;
  for (int i = 0; i < enc.n_states; ++i) a.push_back(enc.amplitude(i));

  PseudoBooleanPoly obj(enc.n_vars());
  PseudoBooleanPoly norm(enc.n_vars());
  for (int i = 0; i < enc.n_states; ++i) {
    const auto aa = a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
    norm += aa;
    obj += hr(i, i) * aa;
    for (int j = i + 1; j < enc.n_states; ++j) {
      if (hr(i, j) != 0.0) obj += (2.0 * hr(i, j)) * (a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)]);
    }
  }
  norm.add_constant(-1.0);
  obj += penalty * (norm * norm);
  return obj;
}

inline PseudoBooleanPoly encode_ground_state_problem(const PauliSum& h, const AmplitudeEncoding& enc) {
  return encode_ground_state_problem(h, enc, default_encoding_penalty(h));
}

/// <a|H|a> / <a|a>; NaN for the zero vector.
inline double rayleigh_quotient(const PauliSum& h, const std::vector<double>& a) {
  const Eigen::MatrixXd hr = h.dense().real();
  const Eigen::Map<const Eigen::VectorXd> v(a.data(), static_cast<Eigen::Index>(a.size()));
  const double nn = v.squaredNorm();
  if (nn == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return v.dot(hr * v) / nn;
}

struct EncodedSolution {
  std::vector<double> amplitudes;
  double objective = 0.0;  // polynomial value at the chosen bits
  double energy = 0.0;     // Rayleigh quotient of the decoded amplitudes
};

inline EncodedSolution decode_solution(const PauliSum& h, const AmplitudeEncoding& enc, const PseudoBooleanPoly& p,
                                       std::span<const std::uint8_t> bits) {
  EncodedSolution s;
  s.amplitudes = enc.decode(bits);
  s.objective = p.evaluate(bits.first(static_cast<std::size_t>(p.n_vars())));
  s.energy = rayleigh_quotient(h, s.amplitudes);
  return s;
}

/// Exact minimization of the encoded problem by enumeration.
inline EncodedSolution solve_encoded_exact(const PauliSum& h, const AmplitudeEncoding& enc) {
  const auto p = encode_ground_state_problem(h, enc);
  const auto m = brute_force_min(p);
  return decode_solution(h, enc, p, m.assignment);
}

}  // namespace quatro::qubo
