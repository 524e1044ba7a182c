#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

namespace quatro {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-10;

// Basis index convention: qubit 0 is the most significant bit of the index,
// so the bitstring of an index reads qubit 0 first.
inline int qubit_bit(std::uint64_t index, int qubit, int n_qubits) {
  return static_cast<int>((index >> (n_qubits - 1 - qubit)) & 1U);
}

inline std::string to_bitstring(std::uint64_t index, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int q = 0; q < width; ++q) {
    if (qubit_bit(index, q, width)) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(std::size_t v) { return std::countr_zero(v); }

/// Tensor product of single-qubit Paulis, qubit 0 leftmost.
///
/// Acts on basis states as P|j> = i^{#Y} (-1)^{popcount(j & zmask)} |j ^ xmask>.
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(std::string ops) : ops_(std::move(ops)) {
    if (ops_.empty() || ops_.size() > 62) {
      throw std::invalid_argument("PauliString: length must be in [1, 62]");
    }
    const int n = size();
    for (int q = 0; q < n; ++q) {
      const char c = ops_[static_cast<std::size_t>(q)];
      const std::uint64_t bit = 1ULL << (n - 1 - q);
      switch (c) {
        case 'I': break;
        case 'X': xmask_ |= bit; break;
        case 'Y': xmask_ |= bit; zmask_ |= bit; ++n_y_; break;
        case 'Z': zmask_ |= bit; break;
        default:
          throw std::invalid_argument(std::string("PauliString: bad label '") + c + "'");
      }
    }
  }

  static PauliString identity(int n) { return PauliString(std::string(static_cast<std::size_t>(n), 'I')); }

  int size() const { return static_cast<int>(ops_.size()); }
  const std::string& str() const { return ops_; }
  char operator[](int q) const { return ops_[static_cast<std::size_t>(q)]; }
  std::uint64_t xmask() const { return xmask_; }
  std::uint64_t zmask() const { return zmask_; }
  bool is_identity() const { return xmask_ == 0 && zmask_ == 0; }

  // Phase picked up by basis state j; the image is j ^ xmask().
  cplx phase(std::uint64_t j) const {
    static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cplx p = kIPow[n_y_ % 4];
    if (std::popcount(j & zmask_) & 1) p = -p;
    return p;
  }

  Matrix dense() const {
    const std::size_t dim = 1ULL << size();
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::uint64_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(j ^ xmask_), static_cast<Eigen::Index>(j)) = phase(j);
    }
    return m;
  }

  Vector apply(const Vector& psi) const {
    Vector out(psi.size());
    for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(psi.size()); ++j) {
      out(static_cast<Eigen::Index>(j ^ xmask_)) = phase(j) * psi(static_cast<Eigen::Index>(j));
    }
    return out;
  }

  // <psi|P|psi>; real because P is Hermitian.
  double expectation(const Vector& psi) const {
    cplx acc = 0;
    for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(psi.size()); ++j) {
      acc += std::conj(psi(static_cast<Eigen::Index>(j ^ xmask_))) * phase(j) *
             psi(static_cast<Eigen::Index>(j));
    }
    return acc.real();
  }

  friend bool operator==(const PauliString& a, const PauliString& b) { return a.ops_ == b.ops_; }
  friend bool operator<(const PauliString& a, const PauliString& b) { return a.ops_ < b.ops_; }

 private:
  std::string ops_;
  std::uint64_t xmask_ = 0;
  std::uint64_t zmask_ = 0;
  int n_y_ = 0;
};

/// Real-weighted sum of Pauli strings over a fixed register size.
class PauliSum {
 public:
  static constexpr double kDropTol = 1e-14;

  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("PauliSum: need at least one qubit");
  }

  int n_qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::map<std::string, double>& terms() const { return terms_; }

  PauliSum& add(const std::string& pauli, double coeff) {
    if (static_cast<int>(pauli.size()) != n_) {
      throw std::invalid_argument("PauliSum: term '" + pauli + "' does not match register size " +
                                  std::to_string(n_));
    }
    PauliString check(pauli);
    (void)check;
    if (!std::isfinite(coeff)) throw std::invalid_argument("PauliSum: non-finite coefficient");
    const double merged = terms_[pauli] + coeff;
    if (std::abs(merged) < kDropTol) {
      terms_.erase(pauli);
    } else {
      terms_[pauli] = merged;
    }
    return *this;
  }

  double coeff(const std::string& pauli) const {
    auto it = terms_.find(pauli);
    return it == terms_.end() ? 0.0 : it->second;
  }

  Matrix dense() const {
    const auto dim = static_cast<Eigen::Index>(1ULL << n_);
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto& [label, c] : terms_) m += c * PauliString(label).dense();
    return m;
  }

  Vector apply(const Vector& psi) const {
    check_dim(psi);
    Vector out = Vector::Zero(psi.size());
    for (const auto& [label, c] : terms_) out += c * PauliString(label).apply(psi);
    return out;
  }

  double expectation(const Vector& psi) const {
    check_dim(psi);
    double e = 0;
    for (const auto& [label, c] : terms_) e += c * PauliString(label).expectation(psi);
    return e;
  }

  // Number of non-identity terms; each needs its own expectation estimate.
  std::size_t measured_terms() const {
    std::size_t k = 0;
    for (const auto& [label, c] : terms_) {
      if (label.find_first_not_of('I') != std::string::npos) ++k;
    }
    return k;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["terms"] = nlohmann::json::array();
    for (const auto& [label, c] : terms_) j["terms"].push_back({{"pauli", label}, {"coeff", c}});
    return j;
  }

  static PauliSum from_json(const nlohmann::json& j) {
    PauliSum s(j.at("n").get<int>());
    for (const auto& t : j.at("terms")) s.add(t.at("pauli").get<std::string>(), t.at("coeff").get<double>());
    return s;
  }

 private:
  void check_dim(const Vector& psi) const {
    if (psi.size() != static_cast<Eigen::Index>(1ULL << n_)) {
      throw std::invalid_argument("PauliSum: state dimension " + std::to_string(psi.size()) +
                                  " does not match " + std::to_string(n_) + " qubits");
    }
  }

  int n_ = 0;
  std::map<std::string, double> terms_;
};

inline void require_hermitian(const Matrix& h, double tol = kHermitianTol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
  const double err = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (err > tol) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |h - h^dagger| = " << err << ")";
    throw std::invalid_argument(os.str());
  }
}

/// Decomposes a dense Hermitian matrix into Pauli strings, coefficient
/// trace(P h) / 2^n. Terms below `drop_tol` are omitted.
inline PauliSum pauli_decompose(const Matrix& h, double drop_tol = 1e-12) {
  if (h.rows() != h.cols() || !is_power_of_two(static_cast<std::size_t>(h.rows())) || h.rows() < 2) {
    throw std::invalid_argument("pauli_decompose: dimension " + std::to_string(h.rows()) + "x" +
                                std::to_string(h.cols()) + " is not a square power of two");
  }
  require_hermitian(h);
  const int n = log2_exact(static_cast<std::size_t>(h.rows()));
  if (n > 10) throw std::invalid_argument("pauli_decompose: at most 10 qubits supported");
  const std::uint64_t dim = 1ULL << n;
  static constexpr char kLabels[4] = {'I', 'X', 'Y', 'Z'};

  PauliSum out(n);
  std::string label(static_cast<std::size_t>(n), 'I');
  const std::uint64_t n_strings = 1ULL << (2 * n);
  for (std::uint64_t code = 0; code < n_strings; ++code) {
    for (int q = 0; q < n; ++q) label[static_cast<std::size_t>(q)] = kLabels[(code >> (2 * (n - 1 - q))) & 3U];
    const PauliString p(label);
    // trace(P h) = sum_b phase(b) h[b][b ^ x]
    cplx tr = 0;
    for (std::uint64_t b = 0; b < dim; ++b) {
      tr += p.phase(b) * h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b ^ p.xmask()));
    }
    const double c = tr.real() / static_cast<double>(dim);
    if (std::abs(c) > drop_tol) out.add(label, c);
  }
  return out;
}

}  // namespace quatro
