#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "quatro/qcore/rng.hpp"
#include "quatro/qubo/qubo.hpp"

namespace quatro::qubo {

struct AnnealPause {
  double fraction = 0.6;  // position in the ramp, in (0, 1)
  int hold_sweeps = 100;
};

/// Geometric inverse-temperature ramp over `sweeps`, with an optional
/// constant-beta plateau inserted at the pause point. Non-positive betas are
/// filled in from the problem's coefficient scale.
struct AnnealSchedule {
  int sweeps = 1000;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::optional<AnnealPause> pause;

  void validate() const {
    if (sweeps < 1) throw std::invalid_argument("AnnealSchedule: sweeps must be >= 1");
    if (beta_start < 0.0 || beta_end < 0.0) throw std::invalid_argument("AnnealSchedule: betas must be positive");
    if (beta_start > 0.0 && beta_end > 0.0 && beta_end < beta_start) {
      throw std::invalid_argument("AnnealSchedule: beta must not decrease");
    }
    if (pause) {
      if (!(pause->fraction > 0.0 && pause->fraction < 1.0)) throw std::invalid_argument("AnnealSchedule: pause fraction must lie in (0, 1)");
      if (pause->hold_sweeps < 0) throw std::invalid_argument("AnnealSchedule: negative hold");
    }
  }

  static AnnealSchedule with_pause(int sweeps, double fraction = 0.6, int hold = -1) {
    AnnealSchedule s;
    s.sweeps = sweeps;
    s.pause = AnnealPause{fraction, hold < 0 ? std::max(1, sweeps / 10) : hold};
    return s;
  }
};

// Hot end: a flip across the largest local field is accepted with
// probability 1/2. Cold end: the smallest nonzero coupling is accepted with
// probability 1/100.
inline std::pair<double, double> default_beta_range(const Qubo& q) {
  const auto adj = q.adjacency();
  double max_field = 0, min_coeff = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < adj.size(); ++i) {
    double f = std::abs(q.linear()[i]);
    if (q.linear()[i] != 0.0) min_coeff = std::min(min_coeff, std::abs(q.linear()[i]));
    for (const auto& [j, c] : adj[i]) {
      f += std::abs(c);
      min_coeff = std::min(min_coeff, std::abs(c));
    }
    max_field = std::max(max_field, f);
  }
  if (max_field == 0.0) return {1.0, 1.0};
  const double hot = std::log(2.0) / max_field;
  const double cold = std::log(100.0) / min_coeff;
  return {hot, std::max(hot, cold)};
}

inline std::vector<double> beta_schedule(const AnnealSchedule& s, const Qubo& q) {
  s.validate();
  auto [hot, cold] = default_beta_range(q);
  const double b0 = s.beta_start > 0 ? s.beta_start : std::min(hot, s.beta_end > 0 ? s.beta_end : hot);
  const double b1 = s.beta_end > 0 ? s.beta_end : std::max(cold, b0);
  std::vector<double> betas;
  const int hold_at = s.pause ? static_cast<int>(std::lround(s.pause->fraction * (s.sweeps - 1))) : -1;
  for (int k = 0; k < s.sweeps; ++k) {
    const double f = s.sweeps == 1 ? 1.0 : static_cast<double>(k) / (s.sweeps - 1);
    const double b = b0 * std::pow(b1 / b0, f);
    betas.push_back(b);
    if (k == hold_at) betas.insert(betas.end(), static_cast<std::size_t>(s.pause->hold_sweeps), b);
  }
  return betas;
}

// Metropolis accepts uphill flips with exp(-beta dE); heat-bath resamples
// each spin from its exact conditional, so a sweep at fixed beta over
// uncoupled spins draws them exactly.
enum class UpdateRule { metropolis, heat_bath };

/// One annealing run; `x` is updated in place.
inline void anneal_read(const std::vector<std::vector<std::pair<int, double>>>& adj, const std::vector<double>& linear,
                        const std::vector<double>& betas, Bits& x, Rng& rng,
                        UpdateRule rule = UpdateRule::metropolis) {
  const std::size_t n = x.size();
  // Local field h_i + sum_j J_ij x_j, kept current across flips.
  std::vector<double> field(linear);
  for (std::size_t i = 0; i < n; ++i) {
    if (!x[i]) continue;
    for (const auto& [j, c] : adj[i]) field[static_cast<std::size_t>(j)] += c;
  }
  for (double beta : betas) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rule == UpdateRule::heat_bath) {
        const std::uint8_t next = rng.uniform() * (1.0 + std::exp(beta * field[i])) < 1.0 ? 1 : 0;
        if (next == x[i]) continue;
      } else {
        const double delta = x[i] ? -field[i] : field[i];
        if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
      }
      x[i] ^= 1U;
      const double sgn = x[i] ? 1.0 : -1.0;
      for (const auto& [j, c] : adj[i]) field[static_cast<std::size_t>(j)] += sgn * c;
    }
  }
}

/// Independent single-spin-flip Metropolis reads from random starts. Read r
/// draws from the stream (seed, r), so the result is order independent.
inline SampleSet simulated_anneal(const Qubo& q, int reads, const AnnealSchedule& schedule, std::uint64_t seed) {
  if (reads < 1) throw std::invalid_argument("simulated_anneal: reads must be >= 1");
  const auto betas = beta_schedule(schedule, q);
  const auto adj = q.adjacency();
  std::vector<Bits> samples;
  samples.reserve(static_cast<std::size_t>(reads));
  for (int r = 0; r < reads; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    Bits x(static_cast<std::size_t>(q.n_vars()));
    for (auto& b : x) b = rng.coin() ? 1 : 0;
    anneal_read(adj, q.linear(), betas, x, rng);
    samples.push_back(std::move(x));
  }
  return SampleSet::from_samples(q, samples);
}

}  // namespace quatro::qubo
