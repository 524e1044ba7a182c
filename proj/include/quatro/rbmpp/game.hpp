#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quatro/qcore/rng.hpp"

namespace quatro::rbmpp {

inline constexpr int kGrid = 6;
inline constexpr int kAttentionLevels = 12;
inline constexpr int kDirections = 8;
inline constexpr int kVisible = 3 * 2 * kGrid + kAttentionLevels + kDirections;  // 56
inline constexpr int kAttentionOffset = 3 * 2 * kGrid;                           // 36
inline constexpr int kMoveOffset = kAttentionOffset + kAttentionLevels;          // 48

struct Pos {
  int x = 0;
  int y = 0;
  bool operator==(const Pos&) const = default;
};

// N, NE, E, SE, S, SW, W, NW with N = +y.
inline constexpr std::array<Pos, kDirections> kSteps = {
    Pos{0, 1}, Pos{1, 1}, Pos{1, 0}, Pos{1, -1}, Pos{0, -1}, Pos{-1, -1}, Pos{-1, 0}, Pos{-1, 1}};
inline constexpr std::array<const char*, kDirections> kDirectionNames = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};

inline bool in_grid(Pos p) { return p.x >= 0 && p.x < kGrid && p.y >= 0 && p.y < kGrid; }
inline Pos step(Pos p, int dir) { return {p.x + kSteps[static_cast<std::size_t>(dir)].x, p.y + kSteps[static_cast<std::size_t>(dir)].y}; }
inline int chebyshev(Pos a, Pos b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

struct GameState {
  Pos agent, prey, predator;
  int attention = 0;
  int move = 0;

  bool operator==(const GameState&) const = default;

  void validate() const {
    for (Pos p : {agent, prey, predator}) {
      if (!in_grid(p)) throw std::invalid_argument("GameState: position off the grid");
    }
    if (agent == prey || agent == predator || prey == predator) throw std::invalid_argument("GameState: positions must be distinct");
    if (attention < 0 || attention >= kAttentionLevels) throw std::invalid_argument("GameState: attention level out of range");
    if (move < 0 || move >= kDirections) throw std::invalid_argument("GameState: move index out of range");
  }
};

using VisibleVector = std::vector<std::uint8_t>;

inline VisibleVector encode(const GameState& g) {
  g.validate();
  VisibleVector v(kVisible, 0);
  int base = 0;
  for (Pos p : {g.agent, g.prey, g.predator}) {
    v[static_cast<std::size_t>(base + p.x)] = 1;
    v[static_cast<std::size_t>(base + kGrid + p.y)] = 1;
    base += 2 * kGrid;
  }
  v[static_cast<std::size_t>(kAttentionOffset + g.attention)] = 1;
  v[static_cast<std::size_t>(kMoveOffset + g.move)] = 1;
  return v;
}

namespace detail {
inline int one_hot(const VisibleVector& v, int offset, int width, const char* group) {
  int at = -1;
  for (int i = 0; i < width; ++i) {
    if (!v[static_cast<std::size_t>(offset + i)]) continue;
    if (at >= 0) throw std::invalid_argument(std::string("decode: several bits set in group ") + group);
    at = i;
  }
  if (at < 0) throw std::invalid_argument(std::string("decode: no bit set in group ") + group);
  return at;
}
}  // namespace detail

inline GameState decode(const VisibleVector& v) {
  if (v.size() != static_cast<std::size_t>(kVisible)) throw std::invalid_argument("decode: expected 56 visible units");
  static constexpr std::array<const char*, 6> kGroups = {"agent.x", "agent.y", "prey.x", "prey.y", "predator.x", "predator.y"};
  std::array<int, 6> c{};
  for (int k = 0; k < 6; ++k) c[static_cast<std::size_t>(k)] = detail::one_hot(v, k * kGrid, kGrid, kGroups[static_cast<std::size_t>(k)]);
  GameState g;
  g.agent = {c[0], c[1]};
  g.prey = {c[2], c[3]};
  g.predator = {c[4], c[5]};
  g.attention = detail::one_hot(v, kAttentionOffset, kAttentionLevels, "attention");
  g.move = detail::one_hot(v, kMoveOffset, kDirections, "move");
  g.validate();
  return g;
}

/// Score of moving in `dir`: distance gained from the predator minus distance
/// left to the prey. Returns nothing useful for off-grid moves.
inline int move_score(const GameState& g, int dir) {
  const Pos n = step(g.agent, dir);
  return chebyshev(n, g.predator) - chebyshev(n, g.prey);
}

/// Exhaustive one-step search; ties go to the lowest direction index.
inline int oracle_best_move(const GameState& g) {
  g.validate();
  int best = -1, best_score = 0;
  for (int d = 0; d < kDirections; ++d) {
    if (!in_grid(step(g.agent, d))) continue;
    const int s = move_score(g, d);
    if (best < 0 || s > best_score) {
      best = d;
      best_score = s;
    }
  }
  return best;
}

/// Distinct uniform positions, uniform attention, oracle move.
inline GameState random_state(Rng& rng) {
  auto cell = [&] {
    const auto c = static_cast<int>(rng.below(kGrid * kGrid));
    return Pos{c % kGrid, c / kGrid};
  };
  GameState g;
  g.agent = cell();
  do g.prey = cell();
  while (g.prey == g.agent);
  do g.predator = cell();
  while (g.predator == g.agent || g.predator == g.prey);
  g.attention = static_cast<int>(rng.below(kAttentionLevels));
  g.move = oracle_best_move(g);
  return g;
}

inline std::vector<GameState> make_dataset(int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("make_dataset: negative size");
  Rng rng(seed, 0xDA7A);
  std::vector<GameState> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(random_state(rng));
  return out;
}

inline nlohmann::json to_json(const GameState& g) {
  return {{"agent", {g.agent.x, g.agent.y}},
          {"prey", {g.prey.x, g.prey.y}},
          {"predator", {g.predator.x, g.predator.y}},
          {"attention", g.attention},
          {"move", g.move}};
}

inline GameState state_from_json(const nlohmann::json& j) {
  auto pos = [&](const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw std::invalid_argument(std::string("GameState JSON: ") + key + " must be [x, y]");
    return Pos{a[0].get<int>(), a[1].get<int>()};
  };
  GameState g;
  g.agent = pos("agent");
  g.prey = pos("prey");
  g.predator = pos("predator");
  g.attention = j.at("attention").get<int>();
  g.move = j.at("move").get<int>();
  g.validate();
  return g;
}

/// One JSON object per line.
inline void write_jsonl(std::ostream& os, const std::vector<GameState>& data) {
  for (const auto& g : data) os << to_json(g).dump() << '\n';
}

inline std::vector<GameState> read_jsonl(std::istream& is) {
  std::vector<GameState> out;
  std::string line;
  for (int n = 1; std::getline(is, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(state_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// Episode dynamics for rendering multi-step games. The predator steps
// greedily toward the agent; the prey steps uniformly among cells that do not
// bring it closer to the agent (staying put if none).
inline Pos predator_step(const GameState& g) {
  Pos best = g.predator;
  int best_d = chebyshev(g.predator, g.agent);
  for (int d = 0; d < kDirections; ++d) {
    const Pos n = step(g.predator, d);
    if (!in_grid(n) || n == g.prey) continue;
    const int dist = chebyshev(n, g.agent);
    if (dist < best_d) {
      best = n;
      best_d = dist;
    }
  }
  return best;
}

inline Pos prey_step(const GameState& g, Rng& rng) {
  std::vector<Pos> options;
  const int d0 = chebyshev(g.prey, g.agent);
  for (int d = 0; d < kDirections; ++d) {
    const Pos n = step(g.prey, d);
    if (in_grid(n) && n != g.agent && n != g.predator && chebyshev(n, g.agent) >= d0) options.push_back(n);
  }
  if (options.empty()) return g.prey;
  return options[rng.below(options.size())];
}

}  // namespace quatro::rbmpp
