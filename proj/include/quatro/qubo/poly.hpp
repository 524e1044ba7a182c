#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace quatro::qubo {

using Bits = std::vector<std::uint8_t>;
using Monomial = std::vector<int>;  // sorted, distinct variable indices

/// Multilinear polynomial over boolean variables (x^2 = x).
class PseudoBooleanPoly {
 public:
  static constexpr double kDropTol = 1e-14;

  PseudoBooleanPoly() = default;
  explicit PseudoBooleanPoly(int n_vars) : n_(n_vars) {
    if (n_vars < 0) throw std::invalid_argument("PseudoBooleanPoly: negative variable count");
  }

  int n_vars() const { return n_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  // Adds c * prod(vars); repeated indices collapse because x^2 = x.
  PseudoBooleanPoly& add(Monomial vars, double c) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (int v : vars) {
      if (v < 0 || v >= n_) throw std::out_of_range("PseudoBooleanPoly: variable " + std::to_string(v) + " out of range");
    }
    if (!std::isfinite(c)) throw std::invalid_argument("PseudoBooleanPoly: non-finite coefficient");
    const double merged = terms_[vars] + c;
    if (std::abs(merged) < kDropTol) {
      terms_.erase(vars);
    } else {
      terms_[vars] = merged;
    }
    return *this;
  }

  PseudoBooleanPoly& add_constant(double c) { return add({}, c); }

  double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double constant() const { return coeff({}); }

  int degree() const {
    std::size_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.size());
    return static_cast<int>(d);
  }

  double sum_abs_coeffs(bool include_constant = false) const {
    double s = 0;
    for (const auto& [m, c] : terms_) {
      if (!m.empty() || include_constant) s += std::abs(c);
    }
    return s;
  }

  double evaluate(std::span<const std::uint8_t> x) const {
    if (static_cast<int>(x.size()) < n_) throw std::invalid_argument("PseudoBooleanPoly: assignment too short");
    double e = 0;
    for (const auto& [m, c] : terms_) {
      bool on = true;
      for (int v : m) on = on && x[static_cast<std::size_t>(v)];
      if (on) e += c;
    }
    return e;
  }

  PseudoBooleanPoly& operator+=(const PseudoBooleanPoly& o) {
    grow(o.n_);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }

  PseudoBooleanPoly& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend PseudoBooleanPoly operator+(PseudoBooleanPoly a, const PseudoBooleanPoly& b) { return a += b; }
  friend PseudoBooleanPoly operator*(PseudoBooleanPoly a, double s) { return a *= s; }
  friend PseudoBooleanPoly operator*(double s, PseudoBooleanPoly a) { return a *= s; }

  friend PseudoBooleanPoly operator*(const PseudoBooleanPoly& a, const PseudoBooleanPoly& b) {
    PseudoBooleanPoly out(std::max(a.n_, b.n_));
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m;
        std::set_union(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
        out.add(std::move(m), ca * cb);
      }
    }
    return out;
  }

  void grow(int n_vars) { n_ = std::max(n_, n_vars); }

 private:
  int n_ = 0;
  std::map<Monomial, double> terms_;
};

inline constexpr int kMaxBruteForceVars = 24;

/// Value of p at every assignment (index bit v = variable v), computed with a
/// subset-sum (zeta) transform over the monomial coefficients.
inline std::vector<double> enumerate_values(const PseudoBooleanPoly& p) {
  const int n = p.n_vars();
  if (n > kMaxBruteForceVars) {
    throw std::invalid_argument("enumerate_values: " + std::to_string(n) + " variables exceeds the brute-force limit of " +
                                std::to_string(kMaxBruteForceVars));
  }
  std::vector<double> f(std::size_t{1} << n, 0.0);
  for (const auto& [m, c] : p.terms()) {
    std::size_t mask = 0;
    for (int v : m) mask |= std::size_t{1} << v;
    f[mask] += c;
  }
  for (int b = 0; b < n; ++b) {
    const std::size_t bit = std::size_t{1} << b;
    for (std::size_t s = 0; s < f.size(); ++s) {
      if (s & bit) f[s] += f[s ^ bit];
    }
  }
  return f;
}

inline Bits mask_to_bits(std::uint64_t mask, int n) {
  Bits x(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) x[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>((mask >> v) & 1U);
  return x;
}

struct PolyMinimum {
  Bits assignment;
  double value = std::numeric_limits<double>::infinity();
};

/// Exact minimum of a polynomial of any degree; the lowest-index assignment
/// wins ties.
inline PolyMinimum brute_force_min(const PseudoBooleanPoly& p) {
  const auto f = enumerate_values(p);
  const auto it = std::min_element(f.begin(), f.end());
  return {mask_to_bits(static_cast<std::uint64_t>(it - f.begin()), p.n_vars()), *it};
}

}  // namespace quatro::qubo
