#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quatro/qubo/anneal.hpp"
#include "quatro/qubo/qubo.hpp"
#include "quatro/rbmpp/game.hpp"

namespace quatro::rbmpp {

inline constexpr int kHidden = 56;

using qubo::Bits;
using qubo::Qubo;

/// E(v, h) = -a.v - b.h - v^T W h.
struct RbmModel {
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(kVisible, kHidden);
  Eigen::VectorXd visible_bias = Eigen::VectorXd::Zero(kVisible);
  Eigen::VectorXd hidden_bias = Eigen::VectorXd::Zero(kHidden);

  static RbmModel random(std::uint64_t seed, double scale = 0.01) {
    Rng rng(seed, 0x4B);
    RbmModel m;
    // Box-Muller keeps the stream portable across standard libraries.
    for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
      const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      m.weights.data()[i] = scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    return m;
  }

  bool finite() const { return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite(); }

  void validate() const {
    if (weights.rows() != kVisible || weights.cols() != kHidden || visible_bias.size() != kVisible ||
        hidden_bias.size() != kHidden) {
      throw std::invalid_argument("RbmModel: dimensions must be 56 x 56");
    }
    if (!finite()) throw std::invalid_argument("RbmModel: non-finite parameters");
  }
};

enum class Side { hidden, visible };  // the free layer

inline Eigen::VectorXd to_vector(const Bits& b) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) v(static_cast<Eigen::Index>(i)) = b[i];
  return v;
}

/// Field of each free unit given the clamped layer: p(unit = 1) = sigmoid(field).
inline Eigen::VectorXd conditional_field(const RbmModel& m, const Bits& clamped, Side free) {
  const Eigen::VectorXd c = to_vector(clamped);
  if (free == Side::hidden) {
    if (c.size() != kVisible) throw std::invalid_argument("conditional_field: clamped visible layer must have 56 units");
    return m.hidden_bias + m.weights.transpose() * c;
  }
  if (c.size() != kHidden) throw std::invalid_argument("conditional_field: clamped hidden layer must have 56 units");
  return m.visible_bias + m.weights * c;
}

/// QUBO over the free layer whose Boltzmann distribution at beta = 1 is the
/// RBM conditional. The units decouple, so only linear terms appear.
inline Qubo conditional_qubo(const RbmModel& m, const Bits& clamped, Side free) {
  const Eigen::VectorXd f = conditional_field(m, clamped, free);
  Qubo q(static_cast<int>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) q.add_linear(static_cast<int>(i), -f(i));
  return q;
}

/// Joint QUBO over the unclamped visible units followed by all hidden units.
/// `clamp` marks visible units held at `visible`; every hidden unit is free.
/// Returns the QUBO and, in `free_visible`, the visible index of each leading variable.
inline Qubo joint_qubo(const RbmModel& m, const Bits& visible, const std::vector<bool>& clamp, std::vector<int>& free_visible) {
  if (visible.size() != static_cast<std::size_t>(kVisible) || clamp.size() != visible.size()) {
    throw std::invalid_argument("joint_qubo: visible vector and clamp mask must have 56 entries");
  }
  free_visible.clear();
  for (int i = 0; i < kVisible; ++i) {
    if (!clamp[static_cast<std::size_t>(i)]) free_visible.push_back(i);
  }
  const int nv = static_cast<int>(free_visible.size());
  Qubo q(nv + kHidden);
  for (int j = 0; j < kHidden; ++j) {
    double f = m.hidden_bias(j);
    for (int i = 0; i < kVisible; ++i) {
      if (clamp[static_cast<std::size_t>(i)] && visible[static_cast<std::size_t>(i)]) f += m.weights(i, j);
    }
    q.add_linear(nv + j, -f);
  }
  for (int a = 0; a < nv; ++a) {
    const int i = free_visible[static_cast<std::size_t>(a)];
    q.add_linear(a, -m.visible_bias(i));
    for (int j = 0; j < kHidden; ++j) {
      if (m.weights(i, j) != 0.0) q.add_quadratic(a, nv + j, -m.weights(i, j));
    }
  }
  return q;
}

/// Block-diagonal concatenation; the blocks share no couplings.
inline Qubo pack_parallel(const std::vector<Qubo>& blocks, int k) {
  if (k < 1 || static_cast<int>(blocks.size()) != k) throw std::invalid_argument("pack_parallel: K must equal the number of blocks");
  int n = 0;
  for (const auto& b : blocks) n += b.n_vars();
  Qubo out(n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.n_vars(); ++i) out.add_linear(off + i, b.linear()[static_cast<std::size_t>(i)]);
    for (const auto& [ij, c] : b.quadratic()) out.add_quadratic(off + ij.first, off + ij.second, c);
    out.add_constant(b.constant());
    off += b.n_vars();
  }
  return out;
}

inline std::vector<Bits> unpack_parallel(const Bits& x, const std::vector<int>& sizes) {
  std::vector<Bits> out;
  std::size_t off = 0;
  for (int s : sizes) {
    if (off + static_cast<std::size_t>(s) > x.size()) throw std::invalid_argument("unpack_parallel: sample is shorter than the blocks");
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(s)));
    off += static_cast<std::size_t>(s);
  }
  if (off != x.size()) throw std::invalid_argument("unpack_parallel: sample is longer than the blocks");
  return out;
}

enum class SamplerKind {
  exact,   // heat-bath sweeps at beta = 1
  anneal,  // heat-bath annealing with a ramp ending at beta = 1
};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::exact;
  int anneal_sweeps = 64;  // ramp length for the annealer
  int joint_sweeps = 8;    // sweeps when sampling a coupled QUBO from scratch
};

/// Boltzmann sampler at beta = 1. Each call counts as one anneal.
class Sampler {
 public:
  explicit Sampler(SamplerConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.anneal_sweeps < 1 || cfg_.joint_sweeps < 1) throw std::invalid_argument("Sampler: sweep counts must be >= 1");
  }

  const SamplerConfig& config() const { return cfg_; }
  std::size_t calls() const { return calls_; }

  /// Draws one sample. With `init` the chain continues from that state for
  /// `sweeps` sweeps at beta = 1 (a reverse anneal). Without it, a coupled
  /// problem gets joint_sweeps sweeps from a random start and an uncoupled one
  /// a single exact sweep, or the full ramp for the annealer.
  Bits sample(const Qubo& q, Rng& rng, const Bits* init = nullptr, int sweeps = 1) {
    ++calls_;
    const auto adj = q.adjacency();
    Bits x(static_cast<std::size_t>(q.n_vars()));
    std::vector<double> betas;
    if (init) {
      if (init->size() != x.size()) throw std::invalid_argument("Sampler: initial state has the wrong size");
      x = *init;
      betas.assign(static_cast<std::size_t>(std::max(1, sweeps)), 1.0);
    } else {
      for (auto& b : x) b = rng.coin() ? 1 : 0;
      if (cfg_.kind == SamplerKind::anneal) {
        qubo::AnnealSchedule s;
        s.sweeps = cfg_.anneal_sweeps;
        s.beta_end = 1.0;
        s.beta_start = std::min(1.0, qubo::default_beta_range(q).first);
        betas = qubo::beta_schedule(s, q);
      } else {
        betas.assign(static_cast<std::size_t>(q.quadratic().empty() ? 1 : cfg_.joint_sweeps), 1.0);
      }
    }
    qubo::anneal_read(adj, q.linear(), betas, x, rng, qubo::UpdateRule::heat_bath);
    return x;
  }

 private:
  SamplerConfig cfg_;
  std::size_t calls_ = 0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace quatro::rbmpp
