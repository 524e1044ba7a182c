#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/rng.hpp"

namespace quatro::mpmw {

using Objective = std::function<double(const std::vector<double>&)>;
// Called once per iteration with (iteration, current x, cost estimate).
using IterationHook = std::function<void(int, const std::vector<double>&, double)>;

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  std::vector<double> trace;  // per-iteration cost estimate
  std::size_t evaluations = 0;
  int iterations = 0;
};

class OptimizerDiverged : public std::runtime_error {
 public:
  OptimizerDiverged(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

namespace detail {

// Counts calls and turns a non-finite value into a divergence error.
class CountedObjective {
 public:
  CountedObjective(const Objective& f, const std::vector<double>& trace) : f_(f), trace_(trace) {}
  double operator()(const std::vector<double>& x) {
    ++count_;
    const double v = f_(x);
    if (!std::isfinite(v)) throw OptimizerDiverged("optimizer: objective returned a non-finite value", trace_);
    return v;
  }
  std::size_t count() const { return count_; }

 private:
  const Objective& f_;
  const std::vector<double>& trace_;
  std::size_t count_ = 0;
};

}  // namespace detail

struct SpsaConfig {
  int iters = 500;
  double a = 0.3;
  double c = 0.1;
  double A = -1.0;  // negative: 10% of iters
  double alpha = 0.602;
  double gamma = 0.101;
  std::uint64_t seed = 0;
};

/// Simultaneous-perturbation stochastic approximation; exactly two objective
/// evaluations per iteration. The trace holds the mean of the two probes.
inline OptimResult spsa_minimize(const Objective& f, std::vector<double> x, const SpsaConfig& cfg,
                                 const IterationHook& hook = {}) {
  if (cfg.iters < 1) throw std::invalid_argument("spsa_minimize: iters must be >= 1");
  if (x.empty()) throw std::invalid_argument("spsa_minimize: empty parameter vector");
  OptimResult out;
  detail::CountedObjective eval(f, out.trace);
  Rng rng(cfg.seed);
  const double big_a = cfg.A < 0 ? 0.1 * cfg.iters : cfg.A;
  std::vector<double> delta(x.size()), xp(x.size()), xm(x.size());
  for (int k = 0; k < cfg.iters; ++k) {
    const double ak = cfg.a / std::pow(k + 1 + big_a, cfg.alpha);
    const double ck = cfg.c / std::pow(k + 1, cfg.gamma);
    for (std::size_t i = 0; i < x.size(); ++i) {
      delta[i] = rng.coin() ? 1.0 : -1.0;
      xp[i] = x[i] + ck * delta[i];
      xm[i] = x[i] - ck * delta[i];
    }
    const double fp = eval(xp), fm = eval(xm);
    const double g = (fp - fm) / (2.0 * ck);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= ak * g * delta[i];
    out.trace.push_back(0.5 * (fp + fm));
    if (hook) hook(k, x, out.trace.back());
  }
  out.x = std::move(x);
  out.fx = out.trace.back();
  out.evaluations = eval.count();
  out.iterations = cfg.iters;
  return out;
}

struct SimplexConfig {
  int iters = 500;
  double initial_step = 0.5;
  double xtol = 1e-10;
  double ftol = 1e-12;
};

/// Nelder-Mead with standard coefficients (1, 2, 1/2, 1/2). A simplex that
/// collapses before the cost spread converges is rebuilt once around the best
/// vertex; a second collapse is an error.
inline OptimResult simplex_minimize(const Objective& f, const std::vector<double>& x0, const SimplexConfig& cfg,
                                    const IterationHook& hook = {}) {
  if (cfg.iters < 1) throw std::invalid_argument("simplex_minimize: iters must be >= 1");
  if (x0.empty()) throw std::invalid_argument("simplex_minimize: empty parameter vector");
  OptimResult out;
  detail::CountedObjective eval(f, out.trace);
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts;
  std::vector<double> val;

  auto build = [&](const std::vector<double>& center) {
    pts.assign(1, center);
    for (std::size_t i = 0; i < d; ++i) {
      auto p = center;
      p[i] += cfg.initial_step;
      pts.push_back(std::move(p));
    }
    val.clear();
    for (const auto& p : pts) val.push_back(eval(p));
  };
  build(x0);

  auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  int restarts = 0;
  std::vector<std::size_t> order(d + 1);
  for (int it = 0; it < cfg.iters; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

    double xspread = 0;
    for (const auto& p : pts)
      for (std::size_t i = 0; i < d; ++i) xspread = std::max(xspread, std::abs(p[i] - pts[best][i]));
    const double fspread = val[worst] - val[best];
    out.trace.push_back(val[best]);
    if (hook) hook(it, pts[best], val[best]);
    out.iterations = it + 1;
    if (fspread <= cfg.ftol && xspread <= cfg.xtol) break;
    if (xspread <= 1e-14 && fspread > cfg.ftol) {
      if (++restarts > 1) throw OptimizerDiverged("simplex_minimize: simplex degenerated twice", out.trace);
      build(pts[best]);
      continue;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k : order) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < d; ++i) centroid[i] += pts[k][i] / static_cast<double>(d);
    }
    const auto xr = blend(centroid, pts[worst], -1.0);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const auto xe = blend(centroid, pts[worst], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    // Contract toward the better of the worst point and its reflection.
    const bool outside = fr < val[worst];
    const auto xc = outside ? blend(centroid, xr, 0.5) : blend(centroid, pts[worst], 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= d; ++k) {
      if (k == best) continue;
      pts[k] = blend(pts[best], pts[k], 0.5);
      val[k] = eval(pts[k]);
    }
  }
  const auto b = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  out.x = pts[b];
  out.fx = val[b];
  out.evaluations = eval.count();
  return out;
}

}  // namespace quatro::mpmw
