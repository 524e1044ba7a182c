// Acceptance run: executes the preset behind each criterion and prints one
// PASS/FAIL line per criterion. Tolerances and runtime limits are fixed here,
// not taken from the presets, so a preset edit cannot loosen a check.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quatro/harness/presets.hpp"

using namespace quatro::harness;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct Criterion {
  int id;
  const char* preset;
  double limit_s;
  std::function<void(const ResultBundle&, Verdict&)> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "mpmw-spectrum", 1.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto ev = b.metrics.at("eigenvalues").get<std::vector<double>>();
         v.require(within(ev[0], 1.72 - 0.02, 1.72 + 0.02), "E0 " + fmt(ev[0]) + " vs 1.72 +- 0.02");
         v.require(within(ev[1], 6.21 - 0.02, 6.22 + 0.02), "E1 " + fmt(ev[1]) + " vs 6.21-6.22 +- 0.02");
         v.require(within(ev[2], 11.78 - 0.02, 11.78 + 0.02), "E2 " + fmt(ev[2]) + " vs 11.78 +- 0.02");
       }},
      {2, "ssvqe", 120.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("variant") == "B" && p.at("max_iters").get<int>() <= 500 && p.at("seeds") == 5 && p.at("k") == json({0, 1, 2}),
                   "variant B, k=0,1,2, <=500 iterations, 5 seeds");
         const auto& t = b.tables.at("estimates");
         for (const auto& row : t.rows) {
           const double e = row[t.column("relative_error")].get<double>();
           v.require(e <= 0.05, "k=" + row[0].dump() + " error " + fmt(100 * e, 3) + "% <= 5%");
         }
       }},
      {3, "qite-lanczos", 60.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("dtau").get<double>() == 0.2 && p.at("steps") == 135, "dtau=0.2, 135 steps");
         const auto err = b.metrics.at("relative_errors").get<std::vector<double>>();
         v.require(err.size() >= 3 && err[0] <= 0.01, "ground error " + fmt(100 * err[0], 3) + "% <= 1%");
         v.require(err.size() >= 3 && err[1] <= 0.10 && err[2] <= 0.10, "excited errors " + fmt(100 * err[1], 3) + "%, " + fmt(100 * err[2], 3) + "% <= 10%");
         const double ratio = b.metrics.at("evaluation_ratio").get<double>();
         v.require(ratio >= 10.0, "SSVQE-C/SPSA " + b.metrics.at("ssvqe_c_evaluations").dump() + " vs QITE " +
                                      b.metrics.at("qite_evaluations").dump() + " evaluations, ratio " + fmt(ratio) + " >= 10");
       }},
      {4, "walk-anneal", 120.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("r") == json({2, 3, 4}) && p.at("sa_r") == 3, "r in {2,3,4}, SA at r=3");
         v.require(std::abs(b.metrics.at("ground_energy").get<double>() + 7.22) < 1e-9, "calibrated ground -7.22");
         v.require(b.metrics.at("error_nonincreasing").get<bool>(), "brute-force error non-increasing " + b.metrics.at("exact_errors").dump());
         const double gap = b.metrics.at("sa_relative_gap").get<double>();
         v.require(gap <= 0.05, "SA gap to brute force " + fmt(100 * gap, 3) + "% <= 5%");
       }},
      {5, "walk-absorbing", 60.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("shots") == 100000 && p.at("states") == 8 && p.at("steps") == 4, "1e5 shots, 8 states, 4 timesteps");
         const double tv = b.metrics.at("max_tv").get<double>();
         v.require(tv <= 0.02, "max TV " + fmt(tv) + " <= 0.02");
         v.require(b.metrics.at("survival_nonincreasing").get<bool>(), "survival non-increasing");
       }},
      {6, "walk-noise", 120.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("timestep") == 4 && p.at("p") == json({1e-2, 1e-3, 1e-4}), "p in {1e-2,1e-3,1e-4} at timestep 4");
         std::string tvs;
         for (const auto& row : b.tables.at("noise").rows) tvs += (tvs.empty() ? "" : ", ") + fmt(row[1].get<double>(), 3);
         v.require(b.metrics.at("tv_strictly_decreasing").get<bool>(), "TV strictly decreasing in p (" + tvs + ")");
         const double last = b.metrics.at("tv_at_smallest_p").get<double>();
         v.require(last <= 0.05, "TV at p=1e-4 " + fmt(last) + " <= 0.05");
       }},
      {7, "rbm-parallel", 600.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("k") == json({1, 2, 5, 10}) && p.at("train") == 100 && p.at("test") == 100, "K in {1,2,5,10} on 100/100");
         const double d = b.metrics.at("max_delta_vs_serial").get<double>();
         v.require(d <= 0.10, "max |acc(K) - acc(1)| " + fmt(100 * d, 3) + " pp <= 10 pp, means " + b.metrics.at("mean_accuracy").dump());
         const double low = b.metrics.at("min_accuracy").get<double>();
         v.require(low > 0.125, "lowest run " + fmt(low) + " > 0.125");
       }},
      {8, "lca-chained", 180.0,
       [](const ResultBundle& b, Verdict& v) {
         const auto& p = b.config.at("params");
         v.require(p.at("unroll") == 5 && p.at("steps") == 10 && p.at("reads") == 3500 && p.at("solver") == "sa", "SA, K=5, T=10, 3500 reads");
         v.require(b.metrics.at("value_vars_per_solve") == 60, "60 value variables per solve");
         const auto e = b.metrics.at("error_percent").get<std::vector<double>>();
         v.require(e[0] <= 2.0 && e[1] <= 2.0, "mean local error (" + fmt(e[0], 3) + "%, " + fmt(e[1], 3) + "%) <= 2%");
         v.require(b.metrics.at("bound_met").get<bool>(),
                   "brute-force step within half resolution (" + fmt(b.metrics.at("bound_max_deviation").get<double>()) + " <= 0.0625)");
       }},
      {9, "cloud-speedup", 10.0,
       [](const ResultBundle& b, Verdict& v) {
         const double s = b.metrics.at("ssvqe_batch_speedup").get<double>();
         v.require(std::abs(s - 2.4) <= 0.24, "SSVQE-B batch " + fmt(s) + "x vs 2.4x +- 10%");
         const double rt = b.metrics.at("rbm_train_speedup").get<double>(), rall = b.metrics.at("rbm_total_speedup").get<double>();
         v.require(std::abs(rt - 10) <= 0.5 && std::abs(rall - 10) <= 0.5, "RBM K=10 " + fmt(rt) + "x train, " + fmt(rall) + "x total vs 10x +- 5%");
         const double z = b.metrics.at("equal_batch_speedup").get<double>();
         v.require(z == 3.0, "zero-overhead batch of 3 " + fmt(z, 17) + "x == 3x");
       }},
      {10, "property-suite", 300.0,
       [](const ResultBundle& b, Verdict& v) {
         for (const auto& row : b.tables.at("properties").rows) {
           v.require(row[2] == 0, row[0].get<std::string>() + " " + row[1].dump() + " cases");
         }
       }},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs every acceptance criterion and prints PASS/FAIL per criterion"};
  std::vector<int> only;
  std::string out;
  app.add_option("--only", only, "criterion numbers to run (default all)");
  app.add_option("--out", out, "write each preset's result bundle under this directory");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> pick(only.begin(), only.end());

  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    ++ran;
    Verdict v;
    double secs = 0;
    try {
      auto cfg = with_env_seed(find_preset(c.preset).experiment_config());
      cfg.output = out.empty() ? "" : out + "/" + c.preset;
      const auto b = run(cfg);
      secs = b.runtime_s;
      c.check(b, v);
      v.require(secs < c.limit_s, "runtime " + fmt(secs, 3) + " s < " + fmt(c.limit_s) + " s");
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("error: ") + e.what();
    }
    if (!v.pass) ++failed;
    std::cout << "criterion " << c.id << " [" << c.preset << "]: " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
