#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quatro/qubo/qubo.hpp"

namespace quatro::qubo {

struct Quadratized {
  Qubo qubo;
  int n_original = 0;
  // aux[k] is the pair replaced by variable n_original + k.
  std::vector<std::pair<int, int>> aux;

  Bits project(std::span<const std::uint8_t> x) const {
    return Bits(x.begin(), x.begin() + n_original);
  }

  // Completes an assignment of the original variables with consistent
  // auxiliaries (y = x_a x_b), which is where the penalty vanishes.
  Bits lift(std::span<const std::uint8_t> x) const {
    Bits full(x.begin(), x.begin() + n_original);
    for (const auto& [a, b] : aux) full.push_back(full[static_cast<std::size_t>(a)] & full[static_cast<std::size_t>(b)]);
    return full;
  }
};

inline double default_rosenberg_scale(const PseudoBooleanPoly& p) { return 1.0 + p.sum_abs_coeffs(); }

namespace detail {

// Greedy pair substitution. Returns the rewritten terms; out.aux receives
// the replaced pairs in order.
inline std::map<Monomial, double> rosenberg_substitute(const PseudoBooleanPoly& p, Quadratized& out) {
  std::map<Monomial, double> terms = p.terms();
  out.n_original = p.n_vars();
  int next = p.n_vars();
  for (;;) {
    std::map<std::pair<int, int>, int> freq;
    for (const auto& [m, c] : terms) {
      if (m.size() < 3) continue;
      for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) ++freq[{m[i], m[j]}];
    }
    if (freq.empty()) break;
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [a, b] = best->first;
    const int y = next++;
    out.aux.emplace_back(a, b);

    std::map<Monomial, double> rewritten;
    for (const auto& [m, c] : terms) {
      const bool has = m.size() >= 3 && std::binary_search(m.begin(), m.end(), a) && std::binary_search(m.begin(), m.end(), b);
      if (!has) {
        rewritten[m] += c;
        continue;
      }
      Monomial r;
      for (int v : m) {
        if (v != a && v != b) r.push_back(v);
      }
      r.push_back(y);  // y exceeds every existing index, so r stays sorted
      rewritten[r] += c;
    }
    terms = std::move(rewritten);
  }
  return terms;
}

inline void finish(Quadratized& out, const std::map<Monomial, double>& terms, const std::vector<double>& scale) {
  PseudoBooleanPoly reduced(out.n_original + static_cast<int>(out.aux.size()));
  for (const auto& [m, c] : terms) reduced.add(m, c);
  for (std::size_t k = 0; k < out.aux.size(); ++k) {
    const auto [a, b] = out.aux[k];
    const int y = out.n_original + static_cast<int>(k);
    reduced.add({a, b}, scale[k]);
    reduced.add({a, y}, -2.0 * scale[k]);
    reduced.add({b, y}, -2.0 * scale[k]);
    reduced.add({y}, 3.0 * scale[k]);
  }
  out.qubo = Qubo::from_poly(reduced);
}

}  // namespace detail

/// Rosenberg reduction: while a monomial of degree >= 3 remains, the most
/// frequent variable pair among such monomials is replaced by a fresh y with
/// penalty M (x_a x_b - 2 x_a y - 2 x_b y + 3 y).
inline Quadratized quadratize(const PseudoBooleanPoly& p, double penalty_scale) {
  if (!(penalty_scale > 0.0)) throw std::invalid_argument("quadratize: penalty_scale must be positive");
  Quadratized out;
  const auto terms = detail::rosenberg_substitute(p, out);
  detail::finish(out, terms, std::vector<double>(out.aux.size(), penalty_scale));
  return out;
}

inline Quadratized quadratize(const PseudoBooleanPoly& p) { return quadratize(p, default_rosenberg_scale(p)); }

}  // namespace quatro::qubo
