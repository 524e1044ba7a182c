#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/rng.hpp"
#include "quatro/qubo/anneal.hpp"
#include "quatro/qubo/poly.hpp"
#include "quatro/qubo/quadratize.hpp"

namespace quatro::lca {

using Pair = std::array<double, 2>;
using Inputs = std::vector<Pair>;  // inputs[t-1] = (i_1(t), i_2(t))

/// Two accumulators with leak and mutual inhibition through a sigmoid:
/// x_1(t) = i_1(t) + (1 - leak) x_1(t-1) - inhibition f(x_2(t)), and symmetrically.
/// The step is simultaneous: each unit sees the other's new activation.
struct LcaParams {
  double leak = 0.4;
  double inhibition = 0.3;
  double x0 = 0.0;  // linearization point

  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
  double f(double x) const { return sigmoid(x); }
  double a() const { return sigmoid(x0) * (1.0 - sigmoid(x0)); }
  double b() const { return sigmoid(x0) - a() * x0; }

  void validate() const {
    if (!(leak >= 0.0 && leak <= 1.0)) throw std::invalid_argument("LcaParams: leak must lie in [0, 1]");
    if (!(inhibition >= 0.0)) throw std::invalid_argument("LcaParams: inhibition must be >= 0");
    if (!std::isfinite(x0)) throw std::invalid_argument("LcaParams: linearization point must be finite");
  }
};

inline Inputs constant_inputs(int steps, double i1 = 0.8, double i2 = 0.4) {
  if (steps < 0) throw std::invalid_argument("constant_inputs: negative length");
  return Inputs(static_cast<std::size_t>(steps), Pair{i1, i2});
}

struct LcaTrace {
  Pair x_init{0.0, 0.0};
  std::vector<Pair> x;  // x[t-1] = x(t)
  std::vector<Pair> f;  // activations at the same steps

  int steps() const { return static_cast<int>(x.size()); }
  const Pair& previous(int t) const { return t == 1 ? x_init : x[static_cast<std::size_t>(t) - 2]; }
};

inline void write_trace_csv(std::ostream& os, const LcaTrace& tr, const std::string& method, bool header = true) {
  if (header) os << "t,unit,x,f,method\n";
  os.precision(10);
  for (int t = 1; t <= tr.steps(); ++t) {
    for (int j = 0; j < 2; ++j) {
      os << t << ',' << j + 1 << ',' << tr.x[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(j)] << ','
         << tr.f[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(j)] << ',' << method << '\n';
    }
  }
}

// With c_j = i_j(t) + (1 - leak) x_j(t-1), one exact step solves
// x_1 = c_1 - beta f(c_2 - beta f(x_1)). The left side minus the right is
// strictly increasing in x_1, so the root is unique and bisection finds it.
inline Pair lca_step_exact(const LcaParams& p, const Pair& input, const Pair& prev) {
  const double c1 = input[0] + (1.0 - p.leak) * prev[0];
  const double c2 = input[1] + (1.0 - p.leak) * prev[1];
  const double beta = p.inhibition;
  auto g = [&](double x1) { return x1 - c1 + beta * p.f(c2 - beta * p.f(x1)); };
  double lo = c1 - beta - 1.0, hi = c1 + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  const double x1 = 0.5 * (lo + hi);
  return {x1, c2 - beta * p.f(x1)};
}

// Linear 2x2 solve of x_1 + beta a x_2 = c_1 - beta b and its mirror.
inline Pair lca_step_linear(const LcaParams& p, const Pair& input, const Pair& prev) {
  const double ba = p.inhibition * p.a(), bb = p.inhibition * p.b();
  const double r1 = input[0] + (1.0 - p.leak) * prev[0] - bb;
  const double r2 = input[1] + (1.0 - p.leak) * prev[1] - bb;
  const double det = 1.0 - ba * ba;
  if (std::abs(det) < 1e-14) throw std::domain_error("lca_step_linear: singular step (inhibition * a = 1)");
  return {(r1 - ba * r2) / det, (r2 - ba * r1) / det};
}

namespace detail {
inline void check_inputs(const Inputs& in, int steps, const char* who) {
  if (steps < 1) throw std::invalid_argument(std::string(who) + ": need at least one step");
  if (static_cast<int>(in.size()) < steps) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(in.size()) + " input steps for " + std::to_string(steps) +
                                " timesteps");
  }
}
}  // namespace detail

inline LcaTrace lca_exact(const LcaParams& p, const Inputs& inputs, int steps, Pair x_init = {0.0, 0.0}) {
  p.validate();
  detail::check_inputs(inputs, steps, "lca_exact");
  LcaTrace tr;
  tr.x_init = x_init;
  Pair prev = x_init;
  for (int t = 0; t < steps; ++t) {
    prev = lca_step_exact(p, inputs[static_cast<std::size_t>(t)], prev);
    tr.x.push_back(prev);
    tr.f.push_back({p.f(prev[0]), p.f(prev[1])});
  }
  return tr;
}

inline LcaTrace lca_linearized(const LcaParams& p, const Inputs& inputs, int steps, Pair x_init = {0.0, 0.0}) {
  p.validate();
  detail::check_inputs(inputs, steps, "lca_linearized");
  LcaTrace tr;
  tr.x_init = x_init;
  Pair prev = x_init;
  for (int t = 0; t < steps; ++t) {
    prev = lca_step_linear(p, inputs[static_cast<std::size_t>(t)], prev);
    tr.x.push_back(prev);
    tr.f.push_back({p.a() * prev[0] + p.b(), p.a() * prev[1] + p.b()});
  }
  return tr;
}

/// Signed fixed point in ones' complement: a sign bit, then integer and
/// fraction bits most significant first. A negative value stores the
/// complemented magnitude, so v = sum_k w_k y_k - max_value * s is linear in
/// the bits. Zero has two codes (all zeros, all ones).
struct FixedPointLayout {
  int integer_bits = 2;
  int fraction_bits = 3;

  int n_bits() const { return 1 + integer_bits + fraction_bits; }
  double resolution() const { return std::ldexp(1.0, -fraction_bits); }
  double max_value() const { return std::ldexp(1.0, integer_bits) - resolution(); }
  double weight(int k) const { return std::ldexp(1.0, integer_bits - 1 - k); }  // magnitude bit k

  void validate() const {
    if (integer_bits < 0 || fraction_bits < 0 || n_bits() < 2 || n_bits() > 16) {
      throw std::invalid_argument("FixedPointLayout: need 1 to 15 magnitude bits");
    }
  }

  double decode(std::span<const std::uint8_t> bits) const {
    double v = bits[0] ? -max_value() : 0.0;
    for (int k = 0; k + 1 < n_bits(); ++k) v += bits[static_cast<std::size_t>(k) + 1] ? weight(k) : 0.0;
    return v;
  }

  /// Nearest code, saturating at the range limits; zero encodes as all zeros.
  qubo::Bits encode(double v) const {
    const double c = std::clamp(v, -max_value(), max_value());
    const bool neg = std::llround(c / resolution()) < 0;
    auto q = static_cast<long>(std::llround((neg ? c + max_value() : c) / resolution()));
    qubo::Bits out(static_cast<std::size_t>(n_bits()), 0);
    out[0] = neg ? 1 : 0;
    for (int k = n_bits() - 2; k >= 0; --k) {
      out[static_cast<std::size_t>(k) + 1] = static_cast<std::uint8_t>(q & 1);
      q >>= 1;
    }
    return out;
  }
};

/// Unrolled K-step problem. Value variables come first: for step t (1..K)
/// and unit j the block of n_bits() variables starts at ((t-1)*2 + j)*n_bits().
struct LcaQubo {
  LcaParams params;
  FixedPointLayout layout;
  int k = 1;
  Pair x_prev{0.0, 0.0};
  Inputs inputs;                  // the K inputs used
  qubo::PseudoBooleanPoly poly;   // sum of squared residuals over value variables
  qubo::Quadratized quadratized;  // value variables, then auxiliaries if any

  int n_value_vars() const { return 2 * k * layout.n_bits(); }
  int var(int t, int unit, int bit) const { return ((t - 1) * 2 + unit) * layout.n_bits() + bit; }

  /// Decodes value-variable bits (auxiliaries, if present, are ignored).
  LcaTrace decode(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) < n_value_vars()) throw std::invalid_argument("LcaQubo::decode: too few bits");
    LcaTrace tr;
    tr.x_init = x_prev;
    for (int t = 1; t <= k; ++t) {
      Pair x{};
      for (int j = 0; j < 2; ++j) x[static_cast<std::size_t>(j)] = layout.decode(bits.subspan(static_cast<std::size_t>(var(t, j, 0)), static_cast<std::size_t>(layout.n_bits())));
      tr.x.push_back(x);
      tr.f.push_back({params.a() * x[0] + params.b(), params.a() * x[1] + params.b()});
    }
    return tr;
  }
};

/// Squared residuals of the linearized recurrence over K unrolled steps,
/// x_j(t) - i_j(t) - (1 - leak) x_j(t-1) + inhibition (a x_other(t) + b),
/// with x(0) = x_prev entering as constants. Values are linear in their bits,
/// so the objective is already quadratic and quadratization adds no
/// auxiliaries; it still runs so other layouts stay supported.
inline LcaQubo build_lca_qubo(const LcaParams& p, const Inputs& inputs, int k, Pair x_prev, const FixedPointLayout& layout = {}) {
  p.validate();
  layout.validate();
  detail::check_inputs(inputs, k, "build_lca_qubo");
  for (double v : x_prev) {
    if (!(std::abs(v) <= layout.max_value())) throw std::out_of_range("build_lca_qubo: previous state outside the fixed-point range");
  }
  const LcaTrace ideal = lca_linearized(p, inputs, k, x_prev);
  for (int t = 1; t <= k; ++t) {
    for (double v : ideal.x[static_cast<std::size_t>(t) - 1]) {
      if (!(std::abs(v) <= layout.max_value())) {
        throw std::out_of_range("build_lca_qubo: linearized value " + std::to_string(v) + " at step " + std::to_string(t) +
                                " overflows the fixed-point range");
      }
    }
  }
  LcaQubo out;
  out.params = p;
  out.layout = layout;
  out.k = k;
  out.x_prev = x_prev;
  out.inputs.assign(inputs.begin(), inputs.begin() + k);
  const int n = out.n_value_vars();

  auto value = [&](int t, int j) {
    qubo::PseudoBooleanPoly v(n);
    const int s = out.var(t, j, 0);
    v.add({s}, -layout.max_value());
    for (int b = 0; b + 1 < layout.n_bits(); ++b) v.add({s + 1 + b}, layout.weight(b));
    return v;
  };
  const double ba = p.inhibition * p.a(), bb = p.inhibition * p.b();
  qubo::PseudoBooleanPoly objective(n);
  for (int t = 1; t <= k; ++t) {
    const Pair& in = out.inputs[static_cast<std::size_t>(t) - 1];
    for (int j = 0; j < 2; ++j) {
      qubo::PseudoBooleanPoly r = value(t, j) + ba * value(t, 1 - j);
      double c = bb - in[static_cast<std::size_t>(j)];
      if (t == 1) {
        c -= (1.0 - p.leak) * x_prev[static_cast<std::size_t>(j)];
      } else {
        r += -(1.0 - p.leak) * value(t - 1, j);
      }
      r.add_constant(c);
      objective += r * r;
    }
  }
  out.poly = objective;
  out.quadratized = qubo::quadratize(objective);
  return out;
}

/// Returns value-variable bits for a built problem.
using LcaSolver = std::function<qubo::Bits(const LcaQubo&, int chunk)>;

/// Exhaustive minimization of the quadratized QUBO, projected to value bits.
inline LcaSolver brute_force_solver() {
  return [](const LcaQubo& q, int) { return q.quadratized.project(qubo::brute_force_min(q.quadratized.qubo).best().assignment); };
}

/// Best of `reads` annealing reads on the quadratized QUBO; chunk c draws
/// from the seed stream (seed, c).
inline LcaSolver sa_solver(int reads, qubo::AnnealSchedule schedule, std::uint64_t seed) {
  return [=](const LcaQubo& q, int chunk) {
    const auto set = qubo::simulated_anneal(q.quadratized.qubo, reads, schedule, mix_seed(seed, static_cast<std::uint64_t>(chunk)));
    return q.quadratized.project(set.best().assignment);
  };
}

/// ceil(T/K) successive solves; each decoded final state seeds the next.
inline LcaTrace lca_chained(const LcaParams& p, const Inputs& inputs, int steps, int k, const LcaSolver& solver,
                            Pair x_init = {0.0, 0.0}, const FixedPointLayout& layout = {}) {
  if (k < 1 || steps < k) throw std::invalid_argument("lca_chained: need 1 <= K <= T");
  detail::check_inputs(inputs, steps, "lca_chained");
  LcaTrace out;
  out.x_init = x_init;
  Pair prev = x_init;
  int chunk = 0;
  for (int done = 0; done < steps; done += k, ++chunk) {
    const int len = std::min(k, steps - done);
    const Inputs part(inputs.begin() + done, inputs.begin() + done + len);
    const LcaQubo q = build_lca_qubo(p, part, len, prev, layout);
    const LcaTrace tr = q.decode(solver(q, chunk));
    out.x.insert(out.x.end(), tr.x.begin(), tr.x.end());
    out.f.insert(out.f.end(), tr.f.begin(), tr.f.end());
    prev = tr.x.back();
  }
  return out;
}

struct RelativeError {
  Pair percent{0.0, 0.0};
  std::array<int, 2> compared{0, 0};
  std::array<int, 2> skipped{0, 0};  // reference output exactly zero

  bool defined(int unit) const { return compared[static_cast<std::size_t>(unit)] > 0; }
};

/// Per unit, the mean over steps of |ref - test| / |ref| on the activations,
/// in percent. `ref` must already hold reference outputs evaluated on the
/// test trace's own history (see local_reference).
inline RelativeError mean_local_relative_error(const LcaTrace& ref, const LcaTrace& test) {
  if (ref.f.size() != test.f.size()) throw std::invalid_argument("mean_local_relative_error: traces differ in length");
  RelativeError e;
  for (std::size_t t = 0; t < ref.f.size(); ++t) {
    for (std::size_t j = 0; j < 2; ++j) {
      if (ref.f[t][j] == 0.0) {
        ++e.skipped[j];
        continue;
      }
      e.percent[j] += std::abs((ref.f[t][j] - test.f[t][j]) / ref.f[t][j]);
      ++e.compared[j];
    }
  }
  for (std::size_t j = 0; j < 2; ++j) {
    e.percent[j] = e.compared[j] ? 100.0 * e.percent[j] / e.compared[j] : std::nan("");
  }
  return e;
}

/// Reference step outputs given the test trace's previous states: step t is
/// the model's step from test x(t-1). `linearized` selects the Taylor model.
inline LcaTrace local_reference(const LcaParams& p, const Inputs& inputs, const LcaTrace& test, bool linearized = true) {
  detail::check_inputs(inputs, test.steps(), "local_reference");
  LcaTrace ref;
  ref.x_init = test.x_init;
  for (int t = 1; t <= test.steps(); ++t) {
    const Pair& in = inputs[static_cast<std::size_t>(t) - 1];
    const Pair x = linearized ? lca_step_linear(p, in, test.previous(t)) : lca_step_exact(p, in, test.previous(t));
    ref.x.push_back(x);
    if (linearized) {
      ref.f.push_back({p.a() * x[0] + p.b(), p.a() * x[1] + p.b()});
    } else {
      ref.f.push_back({p.f(x[0]), p.f(x[1])});
    }
  }
  return ref;
}

}  // namespace quatro::lca
