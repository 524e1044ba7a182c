#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "quatro/qubo/qubo.hpp"
#include "quatro/rbmpp/train.hpp"

using namespace quatro;
using namespace quatro::rbmpp;

namespace {

// Independent 8-way enumeration: move deltas written out by hand.
int enumerate_best_move(const GameState& g) {
  const int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  const int dy[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  int best = -1, best_score = -1000;
  for (int d = 0; d < 8; ++d) {
    const int x = g.agent.x + dx[d], y = g.agent.y + dy[d];
    if (x < 0 || x > 5 || y < 0 || y > 5) continue;
    const int dp = std::max(std::abs(x - g.predator.x), std::abs(y - g.predator.y));
    const int dq = std::max(std::abs(x - g.prey.x), std::abs(y - g.prey.y));
    if (dp - dq > best_score) {
      best_score = dp - dq;
      best = d;
    }
  }
  return best;
}

GameState make_state(Pos agent, Pos prey, Pos predator, int attention = 0, int move = 0) {
  GameState g;
  g.agent = agent;
  g.prey = prey;
  g.predator = predator;
  g.attention = attention;
  g.move = move;
  return g;
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(Encode, GroupLeadingBits) {
  const auto v = encode(make_state({0, 0}, {5, 5}, {2, 3}));
  int pop = 0;
  for (auto b : v) pop += b;
  EXPECT_EQ(pop, 8);
  for (int i : {0, 6, 17, 23, 26, 33, 36, 48}) EXPECT_EQ(v[static_cast<std::size_t>(i)], 1) << i;
  EXPECT_EQ(v.size(), 56u);
}

TEST(Encode, RoundTrip) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const GameState g = random_state(rng);
    const auto v = encode(g);
    int pop = 0;
    for (auto b : v) pop += b;
    EXPECT_EQ(pop, 8);
    EXPECT_EQ(decode(v), g);
  }
}

TEST(Encode, MalformedGroupsRejected) {
  auto v = encode(make_state({0, 0}, {5, 5}, {2, 3}));
  v[1] = 1;
  EXPECT_THROW(decode(v), std::invalid_argument);
  v = encode(make_state({0, 0}, {5, 5}, {2, 3}));
  v[48] = 0;
  EXPECT_THROW(decode(v), std::invalid_argument);
  EXPECT_THROW(encode(make_state({0, 0}, {0, 0}, {2, 3})), std::invalid_argument);
  EXPECT_THROW(encode(make_state({0, 6}, {1, 1}, {2, 3})), std::invalid_argument);
}

TEST(Oracle, PreyAdjacentNortheast) {
  EXPECT_EQ(oracle_best_move(make_state({2, 2}, {3, 3}, {5, 0})), 1);
}

TEST(Oracle, FleesAdjacentPredator) {
  const auto g = make_state({1, 1}, {0, 5}, {2, 1});
  const int d = oracle_best_move(g);
  EXPECT_EQ(d, 7);
  int max_dist = 0;
  for (int k = 0; k < kDirections; ++k) {
    if (in_grid(step(g.agent, k))) max_dist = std::max(max_dist, chebyshev(step(g.agent, k), g.predator));
  }
  EXPECT_EQ(chebyshev(step(g.agent, d), g.predator), max_dist);
}

TEST(Oracle, MatchesIndependentEnumeration) {
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    const GameState g = random_state(rng);
    EXPECT_EQ(oracle_best_move(g), enumerate_best_move(g));
    EXPECT_TRUE(in_grid(step(g.agent, g.move)));
  }
}

TEST(Dataset, JsonLinesRoundTrip) {
  const auto data = make_dataset(20, 4);
  std::stringstream ss;
  write_jsonl(ss, data);
  EXPECT_EQ(read_jsonl(ss), data);
  std::stringstream bad("{\"agent\":[0,0],\"prey\":[1,1],\"predator\":[2,2],\"attention\":0,\"move\":0}\n{\"agent\":[0,0]}\n");
  try {
    read_jsonl(bad);
    FAIL() << "expected a parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ConditionalQubo, ZeroModelHasNoCoefficients) {
  const RbmModel m;
  const auto q = conditional_qubo(m, encode(make_state({0, 0}, {5, 5}, {2, 3})), Side::hidden);
  EXPECT_EQ(q.n_vars(), kHidden);
  for (double c : q.linear()) EXPECT_EQ(c, 0.0);
  EXPECT_TRUE(q.quadratic().empty());
}

TEST(ConditionalQubo, SingleWeightBookkeeping) {
  RbmModel m;
  m.weights(0, 0) = 2.0;
  const auto q = conditional_qubo(m, encode(make_state({0, 0}, {5, 5}, {2, 3})), Side::hidden);
  EXPECT_DOUBLE_EQ(q.linear()[0], -2.0);
  for (int j = 1; j < kHidden; ++j) EXPECT_EQ(q.linear()[static_cast<std::size_t>(j)], 0.0);
  Bits h(kHidden, 0);
  h[0] = 1;
  const auto qv = conditional_qubo(m, h, Side::visible);
  EXPECT_DOUBLE_EQ(qv.linear()[0], -2.0);
}

class SamplerMarginals : public ::testing::TestWithParam<SamplerKind> {};

TEST_P(SamplerMarginals, MatchExactConditional) {
  // Random 4x4 sub-model embedded in an otherwise zero RBM.
  Rng rng(21);
  RbmModel m;
  for (int i = 0; i < 4; ++i) {
    m.visible_bias(i) = rng.uniform(-1, 1);
    m.hidden_bias(i) = rng.uniform(-1, 1);
    for (int j = 0; j < 4; ++j) m.weights(i, j) = rng.uniform(-2, 2);
  }
  Bits v(kVisible, 0);
  v[0] = v[2] = v[3] = 1;
  const Qubo q = conditional_qubo(m, v, Side::hidden);
  SamplerConfig cfg;
  cfg.kind = GetParam();
  Sampler sampler(cfg);
  const int reads = 100000;
  std::vector<int> ones(4, 0);
  Rng draw(5);
  for (int r = 0; r < reads; ++r) {
    const Bits h = sampler.sample(q, draw);
    for (int j = 0; j < 4; ++j) ones[static_cast<std::size_t>(j)] += h[static_cast<std::size_t>(j)];
  }
  EXPECT_EQ(sampler.calls(), static_cast<std::size_t>(reads));
  for (int j = 0; j < 4; ++j) {
    double field = m.hidden_bias(j);
    for (int i : {0, 2, 3}) field += m.weights(i, j);
    const double p = sigmoid_ref(field);
    const double sigma = std::sqrt(p * (1 - p) / reads);
    EXPECT_NEAR(ones[static_cast<std::size_t>(j)] / static_cast<double>(reads), p, 5 * sigma) << "unit " << j;
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, SamplerMarginals, ::testing::Values(SamplerKind::exact, SamplerKind::anneal));

TEST(PackParallel, SingleBlockIsIdentity) {
  Qubo q(3);
  q.add_linear(0, 1.5).add_quadratic(0, 2, -1.0).add_constant(0.25);
  const Qubo p = pack_parallel({q}, 1);
  EXPECT_EQ(p.linear(), q.linear());
  EXPECT_EQ(p.quadratic(), q.quadratic());
  EXPECT_EQ(p.constant(), q.constant());
}

TEST(PackParallel, BlockDiagonalConstruction) {
  Qubo a(2), b(2);
  a.add_linear(0, 1).add_quadratic(0, 1, -2);
  b.add_linear(1, 3).add_quadratic(0, 1, 4);
  const Qubo p = pack_parallel({a, b}, 2);
  EXPECT_EQ(p.n_vars(), 4);
  ASSERT_EQ(p.quadratic().size(), 2u);
  EXPECT_DOUBLE_EQ(p.quadratic_coeff(0, 1), -2);
  EXPECT_DOUBLE_EQ(p.quadratic_coeff(2, 3), 4);
  for (const auto& [ij, c] : p.quadratic()) EXPECT_EQ(ij.first / 2, ij.second / 2);
  EXPECT_THROW(pack_parallel({a, b}, 3), std::invalid_argument);
  const auto parts = unpack_parallel({1, 0, 0, 1}, {2, 2});
  EXPECT_EQ(parts[0], (Bits{1, 0}));
  EXPECT_EQ(parts[1], (Bits{0, 1}));
}

TEST(PackParallel, GlobalMinimumConcatenatesBlockMinima) {
  Rng rng(8);
  std::vector<Qubo> blocks;
  Bits expected;
  for (int k = 0; k < 5; ++k) {
    Qubo q(3);
    for (int i = 0; i < 3; ++i) {
      q.add_linear(i, rng.uniform(-1, 1));
      for (int j = i + 1; j < 3; ++j) q.add_quadratic(i, j, rng.uniform(-1, 1));
    }
    const auto best = qubo::brute_force_min(q).best().assignment;
    expected.insert(expected.end(), best.begin(), best.end());
    blocks.push_back(q);
  }
  EXPECT_EQ(qubo::brute_force_min(pack_parallel(blocks, 5)).best().assignment, expected);
}

TEST(PackParallel, BlocksSampleIndependently) {
  Qubo a(2), b(2);
  a.add_linear(0, -0.5).add_quadratic(0, 1, 1.0);
  b.add_linear(0, 0.3).add_linear(1, -0.8).add_quadratic(0, 1, -0.7);
  const Qubo packed = pack_parallel({a, b}, 2);
  Sampler sampler;
  Rng rng(2);
  const int reads = 100000;
  std::vector<std::vector<double>> joint(4, std::vector<double>(4, 0));
  for (int r = 0; r < reads; ++r) {
    const auto parts = unpack_parallel(sampler.sample(packed, rng), {2, 2});
    joint[static_cast<std::size_t>(parts[0][0] * 2 + parts[0][1])][static_cast<std::size_t>(parts[1][0] * 2 + parts[1][1])] += 1.0 / reads;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double pi = 0, pj = 0;
      for (int k = 0; k < 4; ++k) {
        pi += joint[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        pj += joint[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      }
      const double p = pi * pj;
      EXPECT_NEAR(joint[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], p, 5 * std::sqrt(p * (1 - p) / reads) + 1e-12);
    }
  }
}

TEST(Strategy, Validation) {
  EXPECT_THROW(Strategy::parse("serial"), std::invalid_argument);
  EXPECT_THROW(Strategy::parse("parallel", 0), std::invalid_argument);
  EXPECT_EQ(Strategy::parse("standard", 4).k, 1);
  Strategy s;
  s.k = 2;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Train, ZeroLearningRateLeavesModelUnchanged) {
  const auto data = make_dataset(10, 1);
  const RbmModel m0 = RbmModel::random(3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  for (const char* name : {"standard", "combined", "parallel"}) {
    const auto r = cd_train(m0, data, cfg, Strategy::parse(name, 3));
    EXPECT_EQ(r.model.weights, m0.weights) << name;
    EXPECT_EQ(r.model.visible_bias, m0.visible_bias);
    EXPECT_EQ(r.model.hidden_bias, m0.hidden_bias);
  }
}

TEST(Train, ParallelSingleBlockEqualsStandard) {
  const auto data = make_dataset(20, 6);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 9;
  const auto a = cd_train(RbmModel::random(1), data, cfg, Strategy::parse("standard"));
  const auto b = cd_train(RbmModel::random(1), data, cfg, Strategy::parse("parallel", 1));
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.hidden_bias, b.model.hidden_bias);
}

TEST(Train, AnnealCounts) {
  const auto data = make_dataset(20, 6);
  TrainConfig cfg;
  cfg.epochs = 2;
  EXPECT_EQ(cd_train(RbmModel::random(1), data, cfg, Strategy::parse("standard")).sampler_calls, 3u * 20 * 2);
  EXPECT_EQ(cd_train(RbmModel::random(1), data, cfg, Strategy::parse("combined")).sampler_calls, 2u * 20 * 2);
  EXPECT_EQ(cd_train(RbmModel::random(1), data, cfg, Strategy::parse("parallel", 5)).sampler_calls, 3u * 4 * 2);

  const RbmModel m = RbmModel::random(2);
  EXPECT_EQ(evaluate(m, data, Strategy::parse("standard"), {}, 0).sampler_calls, 2u * 20);
  EXPECT_EQ(evaluate(m, data, Strategy::parse("combined"), {}, 0).sampler_calls, 20u);
  EXPECT_EQ(evaluate(m, data, Strategy::parse("parallel", 10), {}, 0).sampler_calls, 2u * 2);
}

TEST(Train, ReconstructionErrorDecreasesEarly) {
  const auto data = make_dataset(10, 12);
  TrainConfig cfg;
  cfg.epochs = 5;
  std::vector<double> mean(6, 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const RbmModel m0 = RbmModel::random(seed);
    mean[0] += reconstruction_error(m0, data) / 5;
    const auto r = cd_train(m0, data, cfg, Strategy::parse("standard"));
    for (int e = 0; e < 5; ++e) mean[static_cast<std::size_t>(e) + 1] += r.epochs[static_cast<std::size_t>(e)].reconstruction_error / 5;
  }
  for (int e = 1; e <= 5; ++e) EXPECT_LT(mean[static_cast<std::size_t>(e)], mean[static_cast<std::size_t>(e) - 1]) << "epoch " << e;
}

TEST(Train, NonFiniteUpdateAborts) {
  const auto data = make_dataset(10, 1);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e308;
  try {
    cd_train(RbmModel::random(0), data, cfg, Strategy::parse("standard"));
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST(Infer, MemorizesSingleSample) {
  const GameState g = make_state({1, 4}, {3, 2}, {5, 5}, 7, 0);
  GameState labeled = g;
  labeled.move = oracle_best_move(g);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 0.1;
  const auto r = cd_train(RbmModel::random(0), {labeled}, cfg, Strategy::parse("standard"));
  Sampler sampler;
  Rng rng(1);
  EXPECT_EQ(infer_move(r.model, g, Strategy::parse("standard"), sampler, rng, 8).move, labeled.move);
  EXPECT_EQ(infer_move(r.model, g, Strategy::parse("combined"), sampler, rng, 8).move, labeled.move);
  EXPECT_EQ(mean_field_move(r.model, g), labeled.move);
}

TEST(Infer, ZeroModelIsUniform) {
  const RbmModel m;
  const std::vector<GameState> states(10000, make_state({2, 2}, {4, 4}, {0, 5}));
  Sampler sampler;
  Rng rng(17);
  const auto moves = infer_moves(m, states, Strategy::parse("standard"), sampler, rng);
  std::vector<double> counts(kDirections, 0);
  for (const auto& inf : moves) counts[static_cast<std::size_t>(inf.move)] += 1;
  double chi2 = 0;
  const double expect = 10000.0 / kDirections;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  EXPECT_LT(chi2, 24.32);  // chi-square, 7 degrees of freedom, p = 0.001
}

TEST(Infer, DeskScaleParallelAccuracy) {
  const auto train = make_dataset(100, 1), test = make_dataset(100, 2);
  auto mean_accuracy = [&](int k) {
    double acc = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      TrainConfig cfg;
      cfg.seed = seed;
      const auto s = Strategy::parse("parallel", k);
      const auto r = cd_train(RbmModel::random(seed), train, cfg, s);
      const double a = evaluate(r.model, test, s, cfg.sampler, seed, 16).accuracy;
      EXPECT_GT(a, 1.0 / 8) << "K=" << k << " seed " << seed;
      acc += a / 3;
    }
    return acc;
  };
  const double base = mean_accuracy(1);
  for (int k : {2, 5, 10}) EXPECT_NEAR(mean_accuracy(k), base, 0.10) << "K=" << k;
}

TEST(Episode, DeviationReportLayout) {
  const auto train = make_dataset(100, 1);
  TrainConfig cfg;
  const auto r = cd_train(RbmModel::random(0), train, cfg, Strategy::parse("standard"));
  const auto steps = run_episode(r.model, make_state({0, 0}, {5, 5}, {5, 0}), 10, Strategy::parse("standard"), {}, 3, 8);
  ASSERT_FALSE(steps.empty());
  for (const auto& s : steps) {
    EXPECT_EQ(s.state.move, oracle_best_move(s.state));
    if (!s.legal) continue;
    EXPECT_GE(s.score_gap, 0);
    if (s.move == s.state.move) {
      EXPECT_EQ(s.score_gap, 0);
    }
  }
  std::stringstream ss;
  write_episode_csv(ss, steps);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "step,agent_x,agent_y,prey_x,prey_y,predator_x,predator_y,move,oracle_move,score_gap,legal,fallback");
  // Same seed, same rollout.
  const auto again = run_episode(r.model, make_state({0, 0}, {5, 5}, {5, 0}), 10, Strategy::parse("standard"), {}, 3, 8);
  ASSERT_EQ(again.size(), steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) EXPECT_EQ(again[i].move, steps[i].move);
}
