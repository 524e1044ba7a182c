#pragma once

#include <string>
#include <vector>

#include "quatro/harness/experiments.hpp"

namespace quatro::harness {

/// A shipped configuration reproducing one reported result. `criterion` is
/// the acceptance check the preset backs.
struct Preset {
  std::string name;
  std::string reproduces;
  int criterion = 0;
  json config;

  ExperimentConfig experiment_config() const { return ExperimentConfig::from_json(config); }
};

inline const std::vector<Preset>& presets() {
  auto cfg = [](const char* experiment, json params, const char* name) {
    return json{{"experiment", experiment}, {"params", std::move(params)}, {"seed", 0}, {"output", std::string("results/") + name}};
  };
  static const std::vector<Preset> all{
      {"walk-reflecting", "reflecting-boundary walk probabilities per timestep", 0,
       cfg("walk", {{"kind", "reflecting"}, {"states", 8}, {"steps", 4}}, "walk-reflecting")},
      {"walk-absorbing", "absorbing walk: sampled post-selection against the exact projector", 5,
       cfg("walk", {{"kind", "absorbing"}, {"states", 8}, {"steps", 4}, {"shots", 100000}}, "walk-absorbing")},
      {"walk-noise", "depolarizing-noise ordering at timestep 4", 6, cfg("walk-noise", json::object(), "walk-noise")},
      {"walk-anneal", "annealed ground state of the -7.22 walk over r = 2, 3, 4", 4, cfg("walk-anneal", json::object(), "walk-anneal")},
      {"mpmw-spectrum", "well eigenvalues 1.72, 6.21, 11.78", 1, cfg("mpmw-spectrum", json::object(), "mpmw-spectrum")},
      {"ssvqe", "noiseless SSVQE-B estimates for k = 0, 1, 2", 2, cfg("ssvqe", json::object(), "ssvqe")},
      {"qite-lanczos", "QITE/Lanczos spectrum and evaluation count against SSVQE-C", 3, cfg("qite-lanczos", json::object(), "qite-lanczos")},
      {"rbm-parallel", "RBM test accuracy for K = 1, 2, 5, 10", 7, cfg("rbm-parallel", json::object(), "rbm-parallel")},
      {"lca-chained", "chained K=5, T=10 LCA solve against the linearized model", 8, cfg("lca", json::object(), "lca-chained")},
      {"cloud-speedup", "2.4x SSVQE batch and 10x RBM scheduling speedups", 9, cfg("cloud-speedup", json::object(), "cloud-speedup")},
      {"property-suite", "randomized invariants across all modules", 10, cfg("property-suite", json::object(), "property-suite")},
  };
  return all;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (see `quatro presets`)");
}

}  // namespace quatro::harness
