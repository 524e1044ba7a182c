#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/rbmpp/rbm.hpp"

namespace quatro::rbmpp {

enum class StrategyKind {
  standard,  // h|v, v|h, h|v: three anneals per training sample, two for inference
  combined,  // the reconstruction samples v and h in one joint anneal
  parallel,  // K samples packed block-diagonally into each anneal
};

struct Strategy {
  StrategyKind kind = StrategyKind::standard;
  int k = 1;

  void validate() const {
    if (k < 1) throw std::invalid_argument("Strategy: K must be >= 1");
    if (kind != StrategyKind::parallel && k != 1) throw std::invalid_argument("Strategy: K != 1 requires the parallel strategy");
  }

  static Strategy parse(const std::string& name, int k = 1) {
    Strategy s;
    if (name == "standard") {
      s.kind = StrategyKind::standard;
    } else if (name == "combined") {
      s.kind = StrategyKind::combined;
    } else if (name == "parallel") {
      s.kind = StrategyKind::parallel;
    } else {
      throw std::invalid_argument("unknown strategy '" + name + "' (expected standard, combined or parallel)");
    }
    s.k = s.kind == StrategyKind::parallel ? k : 1;
    s.validate();
    return s;
  }

  std::string name() const {
    switch (kind) {
      case StrategyKind::standard: return "standard";
      case StrategyKind::combined: return "combined";
      case StrategyKind::parallel: return "parallel";
    }
    return "?";
  }
};

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.05;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
  SamplerConfig sampler{};

  void validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be >= 0");
  }
};

struct EpochStats {
  int epoch = 0;
  double train_accuracy = 0.0;        // mean-field readout on the training set
  double reconstruction_error = 0.0;  // mean squared mean-field reconstruction error per unit
  std::size_t sampler_calls = 0;      // cumulative anneals
};

struct TrainResult {
  RbmModel model;
  std::vector<EpochStats> epochs;
  std::size_t sampler_calls = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<EpochStats> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<EpochStats>& trace() const { return trace_; }

 private:
  std::vector<EpochStats> trace_;
};

/// Visible vector with the move group cleared.
inline Bits clamp_state(const GameState& g) {
  Bits v = encode(g);
  std::fill(v.begin() + kMoveOffset, v.end(), 0);
  return v;
}

inline std::vector<bool> state_clamp_mask() {
  std::vector<bool> c(kVisible, true);
  std::fill(c.begin() + kMoveOffset, c.end(), false);
  return c;
}

/// Deterministic readout: the move unit with the largest visible field after
/// one mean-field pass from the clamped state.
inline int mean_field_move(const RbmModel& m, const GameState& g) {
  const Eigen::VectorXd v = to_vector(clamp_state(g));
  const Eigen::VectorXd h = (m.hidden_bias + m.weights.transpose() * v).unaryExpr([](double x) { return sigmoid(x); });
  const Eigen::VectorXd f = m.visible_bias.segment(kMoveOffset, kDirections) + m.weights.middleRows(kMoveOffset, kDirections) * h;
  Eigen::Index best = 0;
  f.maxCoeff(&best);
  return static_cast<int>(best);
}

inline double reconstruction_error(const RbmModel& m, const std::vector<GameState>& data) {
  if (data.empty()) return 0.0;
  double err = 0;
  for (const auto& g : data) {
    const Eigen::VectorXd v = to_vector(encode(g));
    const Eigen::VectorXd h = (m.hidden_bias + m.weights.transpose() * v).unaryExpr([](double x) { return sigmoid(x); });
    const Eigen::VectorXd r = (m.visible_bias + m.weights * h).unaryExpr([](double x) { return sigmoid(x); });
    err += (v - r).squaredNorm() / kVisible;
  }
  return err / static_cast<double>(data.size());
}

namespace detail {

// Samples one layer for every member of a batch. The parallel strategy packs
// the batch into a single anneal; the others anneal per sample.
inline std::vector<Bits> sample_layer(const RbmModel& m, const std::vector<Bits>& clamped, Side free, bool packed,
                                      Sampler& sampler, Rng& rng) {
  std::vector<Qubo> qs;
  for (const auto& c : clamped) qs.push_back(conditional_qubo(m, c, free));
  if (!packed) {
    std::vector<Bits> out;
    for (const auto& q : qs) out.push_back(sampler.sample(q, rng));
    return out;
  }
  std::vector<int> sizes;
  for (const auto& q : qs) sizes.push_back(q.n_vars());
  return unpack_parallel(sampler.sample(pack_parallel(qs, static_cast<int>(qs.size())), rng), sizes);
}

inline void accumulate(RbmModel& grad, const Bits& v0, const Bits& h0, const Bits& v1, const Bits& h1) {
  const Eigen::VectorXd a0 = to_vector(v0), b0 = to_vector(h0), a1 = to_vector(v1), b1 = to_vector(h1);
  grad.weights += a0 * b0.transpose() - a1 * b1.transpose();
  grad.visible_bias += a0 - a1;
  grad.hidden_bias += b0 - b1;
}

}  // namespace detail

/// CD-1 gradient summed over one batch.
inline RbmModel cd_gradient(const RbmModel& m, const std::vector<Bits>& batch, const Strategy& strategy, Sampler& sampler,
                            Rng& rng) {
  RbmModel grad;
  const bool packed = strategy.kind == StrategyKind::parallel;
  const auto h0 = detail::sample_layer(m, batch, Side::hidden, packed, sampler, rng);
  if (strategy.kind == StrategyKind::combined) {
    std::vector<int> free_visible;
    const std::vector<bool> none(kVisible, false);
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const Qubo q = joint_qubo(m, batch[s], none, free_visible);
      Bits init = batch[s];
      init.insert(init.end(), h0[s].begin(), h0[s].end());
      // One sweep from (v0, h0) visits v given h0, then h given the new v.
      const Bits x = sampler.sample(q, rng, &init, 1);
      const Bits v1(x.begin(), x.begin() + kVisible), h1(x.begin() + kVisible, x.end());
      detail::accumulate(grad, batch[s], h0[s], v1, h1);
    }
    return grad;
  }
  const auto v1 = detail::sample_layer(m, h0, Side::visible, packed, sampler, rng);
  const auto h1 = detail::sample_layer(m, v1, Side::hidden, packed, sampler, rng);
  for (std::size_t s = 0; s < batch.size(); ++s) detail::accumulate(grad, batch[s], h0[s], v1[s], h1[s]);
  return grad;
}

/// Contrastive-divergence training. Each epoch visits the data in a seeded
/// random order, in batches of K (1 unless parallel), with one summed update
/// per batch.
inline TrainResult cd_train(RbmModel model, const std::vector<GameState>& data, const TrainConfig& cfg,
                            const Strategy& strategy) {
  cfg.validate();
  strategy.validate();
  model.validate();
  std::vector<Bits> encoded;
  for (const auto& g : data) encoded.push_back(encode(g));
  Sampler sampler(cfg.sampler);
  TrainResult out;
  std::vector<std::size_t> order(encoded.size());
  for (int e = 0; e < cfg.epochs; ++e) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(e) + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(strategy.k)) {
      std::vector<Bits> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + static_cast<std::size_t>(strategy.k)); ++i) {
        batch.push_back(encoded[order[i]]);
      }
      const RbmModel g = cd_gradient(model, batch, strategy, sampler, rng);
      model.weights += cfg.learning_rate * g.weights;
      model.visible_bias += cfg.learning_rate * g.visible_bias;
      model.hidden_bias += cfg.learning_rate * g.hidden_bias;
    }
    EpochStats st;
    st.epoch = e + 1;
    st.sampler_calls = sampler.calls();
    if (!model.finite()) {
      out.epochs.push_back(st);
      throw TrainingDiverged("cd_train: non-finite parameters after epoch " + std::to_string(e + 1), out.epochs);
    }
    int hits = 0;
    for (const auto& g : data) hits += mean_field_move(model, g) == g.move ? 1 : 0;
    st.train_accuracy = data.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(data.size());
    st.reconstruction_error = reconstruction_error(model, data);
    out.epochs.push_back(st);
  }
  out.model = std::move(model);
  out.sampler_calls = sampler.calls();
  return out;
}

struct Inference {
  int move = 0;
  bool fallback = false;  // no read set any move bit
};

namespace detail {

inline Eigen::VectorXd move_field(const RbmModel& m, const Bits& h) {
  return m.visible_bias.segment(kMoveOffset, kDirections) + m.weights.middleRows(kMoveOffset, kDirections) * to_vector(h);
}

// Move bits sampled in one read, with the visible fields they were drawn from.
struct MoveRead {
  Bits bits;
  Eigen::VectorXd field;
};

inline std::vector<MoveRead> read_once(const RbmModel& m, const std::vector<GameState>& states, const Strategy& strategy,
                                       Sampler& sampler, Rng& rng) {
  std::vector<MoveRead> out;
  if (strategy.kind == StrategyKind::combined) {
    const auto mask = state_clamp_mask();
    std::vector<int> free_visible;
    for (const auto& g : states) {
      const Qubo q = joint_qubo(m, clamp_state(g), mask, free_visible);
      const Bits x = sampler.sample(q, rng);
      const Bits h(x.begin() + kDirections, x.end());
      out.push_back({Bits(x.begin(), x.begin() + kDirections), move_field(m, h)});
    }
    return out;
  }
  const bool packed = strategy.kind == StrategyKind::parallel;
  for (std::size_t start = 0; start < states.size(); start += static_cast<std::size_t>(strategy.k)) {
    std::vector<Bits> batch;
    for (std::size_t i = start; i < std::min(states.size(), start + static_cast<std::size_t>(strategy.k)); ++i) {
      batch.push_back(clamp_state(states[i]));
    }
    const auto h = sample_layer(m, batch, Side::hidden, packed, sampler, rng);
    const auto v = sample_layer(m, h, Side::visible, packed, sampler, rng);
    for (std::size_t s = 0; s < batch.size(); ++s) out.push_back({Bits(v[s].begin() + kMoveOffset, v[s].end()), move_field(m, h[s])});
  }
  return out;
}

}  // namespace detail

/// Infers moves for a batch of states. Standard and parallel anneal the
/// hidden layer from the clamped state, then the visible layer (parallel packs
/// K states into each anneal). Combined samples the move group and the hidden
/// layer jointly in one anneal. Over `reads` repetitions the most frequently
/// set move bit wins, ties going to the larger mean field and then to a
/// uniform draw. If no read set a move bit the result is flagged.
inline std::vector<Inference> infer_moves(const RbmModel& m, const std::vector<GameState>& states, const Strategy& strategy,
                                          Sampler& sampler, Rng& rng, int reads = 1) {
  strategy.validate();
  if (reads < 1) throw std::invalid_argument("infer_moves: reads must be >= 1");
  std::vector<std::vector<int>> votes(states.size(), std::vector<int>(kDirections, 0));
  std::vector<Eigen::VectorXd> field(states.size(), Eigen::VectorXd::Zero(kDirections));
  for (int r = 0; r < reads; ++r) {
    const auto once = detail::read_once(m, states, strategy, sampler, rng);
    for (std::size_t s = 0; s < states.size(); ++s) {
      for (int d = 0; d < kDirections; ++d) votes[s][static_cast<std::size_t>(d)] += once[s].bits[static_cast<std::size_t>(d)];
      field[s] += once[s].field;
    }
  }
  std::vector<Inference> out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<int> tied{0};
    for (int d = 1; d < kDirections; ++d) {
      const int a = votes[s][static_cast<std::size_t>(d)], b = votes[s][static_cast<std::size_t>(tied[0])];
      if (a > b || (a == b && field[s](d) > field[s](tied[0]))) {
        tied = {d};
      } else if (a == b && field[s](d) == field[s](tied[0])) {
        tied.push_back(d);
      }
    }
    Inference inf;
    inf.move = tied.size() == 1 ? tied[0] : tied[rng.below(tied.size())];
    inf.fallback = votes[s][static_cast<std::size_t>(inf.move)] == 0;
    out.push_back(inf);
  }
  return out;
}

inline Inference infer_move(const RbmModel& m, const GameState& g, const Strategy& strategy, Sampler& sampler, Rng& rng,
                            int reads = 1) {
  Strategy single = strategy;
  single.k = 1;
  if (single.kind == StrategyKind::parallel) single.kind = StrategyKind::standard;
  return infer_moves(m, {g}, single, sampler, rng, reads).front();
}

struct Evaluation {
  double accuracy = 0.0;
  int correct = 0;
  int total = 0;
  int fallbacks = 0;
  std::size_t sampler_calls = 0;
};

inline Evaluation evaluate(const RbmModel& m, const std::vector<GameState>& data, const Strategy& strategy,
                           const SamplerConfig& sampler_cfg, std::uint64_t seed, int reads = 1) {
  Sampler sampler(sampler_cfg);
  Rng rng(seed, 0xE7A1);
  const auto moves = infer_moves(m, data, strategy, sampler, rng, reads);
  Evaluation ev;
  ev.total = static_cast<int>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ev.correct += moves[i].move == data[i].move ? 1 : 0;
    ev.fallbacks += moves[i].fallback ? 1 : 0;
  }
  ev.accuracy = ev.total ? static_cast<double>(ev.correct) / ev.total : 0.0;
  ev.sampler_calls = sampler.calls();
  return ev;
}

struct EpisodeStep {
  int step = 0;
  GameState state;        // before the move; state.move holds the oracle move
  int move = 0;           // the model's move
  bool fallback = false;
  bool legal = true;      // off-grid moves leave the agent in place
  int score_gap = 0;      // oracle score minus the model move's score
};

/// Rolls out an episode, recording at each step how far the model's move
/// deviates from the one-step exhaustive search. Ends early on capture.
inline std::vector<EpisodeStep> run_episode(const RbmModel& m, GameState g, int steps, const Strategy& strategy,
                                            const SamplerConfig& sampler_cfg, std::uint64_t seed, int reads = 1) {
  Sampler sampler(sampler_cfg);
  Rng rng(seed, 0xE915);
  std::vector<EpisodeStep> out;
  for (int t = 0; t < steps; ++t) {
    g.move = oracle_best_move(g);
    EpisodeStep st;
    st.step = t;
    st.state = g;
    const Inference inf = infer_move(m, g, strategy, sampler, rng, reads);
    st.move = inf.move;
    st.fallback = inf.fallback;
    const Pos next = step(g.agent, inf.move);
    st.legal = in_grid(next);
    const int stay = chebyshev(g.agent, g.predator) - chebyshev(g.agent, g.prey);
    st.score_gap = move_score(g, g.move) - (st.legal ? move_score(g, inf.move) : stay);
    out.push_back(st);
    if (st.legal) g.agent = next;
    if (g.agent == g.prey || g.agent == g.predator) break;
    g.predator = predator_step(g);
    if (g.predator == g.agent) break;
    g.prey = prey_step(g, rng);
  }
  return out;
}

inline void write_episode_csv(std::ostream& os, const std::vector<EpisodeStep>& steps) {
  os << "step,agent_x,agent_y,prey_x,prey_y,predator_x,predator_y,move,oracle_move,score_gap,legal,fallback\n";
  for (const auto& s : steps) {
    os << s.step << ',' << s.state.agent.x << ',' << s.state.agent.y << ',' << s.state.prey.x << ',' << s.state.prey.y << ','
       << s.state.predator.x << ',' << s.state.predator.y << ',' << kDirectionNames[static_cast<std::size_t>(s.move)] << ','
       << kDirectionNames[static_cast<std::size_t>(s.state.move)] << ',' << s.score_gap << ',' << (s.legal ? 1 : 0) << ','
       << (s.fallback ? 1 : 0) << '\n';
  }
}

}  // namespace quatro::rbmpp
