#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "quatro/qcore/evolve.hpp"

namespace quatro::mpmw {

// The stopping rule is a configuration choice: stop once one position leads
// the runner-up by `lead` observations, or give up after `max_particles`.
struct DecisionConfig {
  int eigenstate = 0;
  int max_particles = 100;
  int lead = 3;
  std::uint64_t seed = 0;
};

struct DecisionResult {
  int choice = -1;  // -1 when no position reached the lead
  int particles = 0;
  std::vector<int> counts;
};

/// Measures particles one at a time in the chosen eigenstate, accumulating
/// per-position evidence until the stopping rule fires.
inline DecisionResult particle_decision(const PauliSum& h, const DecisionConfig& cfg) {
  if (cfg.max_particles < 1 || cfg.lead < 1) throw std::invalid_argument("particle_decision: bad stopping rule");
  const auto s = spectrum(h.dense());
  if (cfg.eigenstate < 0 || cfg.eigenstate >= s.values.size()) throw std::out_of_range("particle_decision: eigenstate index");
  std::vector<double> p(static_cast<std::size_t>(s.values.size()));
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s.vectors(static_cast<Eigen::Index>(i), cfg.eigenstate));
  const auto cdf = cumulative_sum(p);
  Rng rng(cfg.seed);
  DecisionResult r;
  r.counts.assign(p.size(), 0);
  while (r.particles < cfg.max_particles) {
    ++r.counts[draw_index(cdf, rng)];
    ++r.particles;
    std::vector<int> sorted = r.counts;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - (sorted.size() > 1 ? sorted[1] : 0) >= cfg.lead) {
      r.choice = static_cast<int>(std::max_element(r.counts.begin(), r.counts.end()) - r.counts.begin());
      break;
    }
  }
  return r;
}

}  // namespace quatro::mpmw
