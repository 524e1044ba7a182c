// quatro: command-line front end. Every subcommand builds an experiment
// config and runs it through the harness, so seeds, hashing and bundles
// behave the same whichever way an experiment is launched.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quatro/harness/presets.hpp"

using namespace quatro::harness;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;     // main table; empty or "-" means stdout
  std::string bundle;  // optional directory for every table plus result.json
};

void add_common(CLI::App* app, Common& c, const char* out_help) {
  app->add_option("--seed", c.seed, "RNG seed (QUATRO_SEED overrides)")->capture_default_str();
  app->add_option("--out", c.out, out_help);
  app->add_option("--bundle", c.bundle, "also write all tables and result.json to this directory");
}

void write_table(const Table& t, const std::string& path) {
  if (path.empty() || path == "-") {
    t.write_csv(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  t.write_csv(f);
}

ResultBundle run_config(const std::string& experiment, json params, const Common& c) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.params = std::move(params);
  cfg.seed = c.seed;
  cfg.output = c.bundle;
  return run(with_env_seed(cfg));
}

// Tables go to --out; metrics go to stderr so stdout stays a clean CSV.
void finish(const ResultBundle& b, const std::string& table, const Common& c) {
  write_table(b.tables.at(table), c.out);
  std::cerr << b.metrics.dump() << '\n';
}

int list_presets() {
  std::cout << std::left << std::setw(18) << "preset" << std::setw(10) << "criterion" << std::setw(16) << "experiment"
            << "reproduces\n";
  for (const auto& p : presets()) {
    std::cout << std::setw(18) << p.name << std::setw(10) << (p.criterion ? std::to_string(p.criterion) : "-") << std::setw(16)
              << p.config.at("experiment").get<std::string>() << p.reproduces << '\n';
  }
  return 0;
}

// Runs presets, at most `jobs` at a time; each writes its own bundle.
int run_presets(std::vector<std::string> names, int jobs, const std::string& out_dir) {
  if (names.size() == 1 && names.front() == "all") {
    names.clear();
    for (const auto& p : presets()) names.push_back(p.name);
  }
  std::vector<ExperimentConfig> cfgs;
  for (const auto& n : names) {
    auto c = with_env_seed(find_preset(n).experiment_config());
    if (!out_dir.empty()) c.output = out_dir + "/" + n;
    cfgs.push_back(c);
  }
  std::mutex io;
  int failed = 0;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lk(io);
        if (next >= cfgs.size()) return;
        i = next++;
      }
      try {
        const auto b = run(cfgs[i]);
        std::lock_guard<std::mutex> lk(io);
        std::cout << names[i] << ": ok in " << b.runtime_s << " s, hash " << b.input_hash << ", " << b.metrics.dump() << std::endl;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(io);
        std::cerr << names[i] << ": error: " << e.what() << std::endl;
        ++failed;
      }
    }
  };
  std::vector<std::future<void>> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quatro: desk-scale quantum models, annealing compilations and cloud scheduling"};
  app.require_subcommand(1);

  Common walk_c;
  std::string walk_kind = "reflecting";
  int walk_states = 8, walk_steps = 4, walk_shots = 0;
  auto* walk = app.add_subcommand("walk", "quantum walk probabilities (CSV: timestep,state,probability)");
  walk->add_option("--kind", walk_kind)->check(CLI::IsMember({"reflecting", "absorbing"}))->capture_default_str();
  walk->add_option("--states", walk_states, "lattice states (power of two)")->capture_default_str();
  walk->add_option("--steps", walk_steps)->capture_default_str();
  walk->add_option("--shots", walk_shots, "0 evaluates exactly")->capture_default_str();
  add_common(walk, walk_c, "probability CSV (default stdout)");

  Common qubo_c;
  std::string qubo_in, qubo_method = "sa";
  int qubo_reads = 100, qubo_sweeps = 1000;
  auto* qubo = app.add_subcommand("qubo", "QUBO tools");
  qubo->require_subcommand(1);
  auto* solve = qubo->add_subcommand("solve", "sample a QUBO JSON file; prints a sample-set JSON");
  solve->add_option("--in", qubo_in, "QUBO JSON {n, linear, quadratic, constant}")->required();
  solve->add_option("--reads", qubo_reads)->capture_default_str();
  solve->add_option("--sweeps", qubo_sweeps)->capture_default_str();
  solve->add_option("--method", qubo_method)->check(CLI::IsMember({"sa", "brute"}))->capture_default_str();
  add_common(solve, qubo_c, "samples CSV (default: JSON to stdout)");

  Common mp_c;
  std::string mp_solver = "ssvqe-b", mp_opt = "spsa";
  int mp_k = 0, mp_positions = 4, mp_iters = 500;
  double mp_dx = 1.0 / 3.0;
  auto* mp = app.add_subcommand("mpmw", "particle-in-a-well eigensolvers (CSV: iteration,cost,E0..Ek,evaluations)");
  mp->add_option("--solver", mp_solver)->check(CLI::IsMember({"ssvqe-b", "ssvqe-c", "qite"}))->capture_default_str();
  mp->add_option("--k", mp_k, "target excited state")->capture_default_str();
  mp->add_option("--positions", mp_positions)->capture_default_str();
  mp->add_option("--dx", mp_dx)->capture_default_str();
  mp->add_option("--optimizer", mp_opt)->check(CLI::IsMember({"spsa", "simplex"}))->capture_default_str();
  mp->add_option("--max-iters", mp_iters)->capture_default_str();
  add_common(mp, mp_c, "trace CSV (default stdout)");

  Common pp_c;
  std::string pp_strategy = "standard", pp_sampler = "exact";
  int pp_train = 100, pp_test = 100, pp_epochs = 30, pp_k = 1, pp_reads = 16;
  auto* pp = app.add_subcommand("pp", "predator-prey RBM (CSV: epoch,train_accuracy,reconstruction_error,sampler_calls)");
  pp->add_option("--train", pp_train)->capture_default_str();
  pp->add_option("--test", pp_test)->capture_default_str();
  pp->add_option("--epochs", pp_epochs)->capture_default_str();
  pp->add_option("--strategy", pp_strategy)->check(CLI::IsMember({"standard", "combined", "parallel"}))->capture_default_str();
  pp->add_option("--K", pp_k, "samples per anneal (parallel strategy)")->capture_default_str();
  pp->add_option("--sampler", pp_sampler)->check(CLI::IsMember({"exact", "anneal"}))->capture_default_str();
  pp->add_option("--reads", pp_reads, "inference reads per state")->capture_default_str();
  add_common(pp, pp_c, "metrics CSV (default stdout)");

  Common lca_c;
  std::string lca_solver = "sa";
  int lca_steps = 10, lca_unroll = 5, lca_reads = 3500, lca_sweeps = 1000;
  auto* lca = app.add_subcommand("lca", "leaky competing accumulator (CSV: t,unit,x,f,method)");
  lca->add_option("--steps", lca_steps)->capture_default_str();
  lca->add_option("--unroll", lca_unroll, "timesteps per QUBO")->capture_default_str();
  lca->add_option("--solver", lca_solver)->check(CLI::IsMember({"exact", "sa", "brute"}))->capture_default_str();
  lca->add_option("--reads", lca_reads)->capture_default_str();
  lca->add_option("--sweeps", lca_sweeps)->capture_default_str();
  add_common(lca, lca_c, "trace CSV (default stdout)");

  Common cl_c;
  std::string cl_workload, cl_policy = "least-loaded", cl_cloudlet = "off", cl_events = "events.csv";
  int cl_gates = 3, cl_annealers = 1;
  double cl_overhead = 0.0, cl_local = 0.0;
  auto* cl = app.add_subcommand("cloud", "schedule a workload; metrics JSON to --out, event log CSV to --events");
  cl->add_option("--workload", cl_workload, "workload CSV")->required();
  cl->add_option("--policy", cl_policy)->check(CLI::IsMember({"pinned", "least-loaded", "preference"}))->capture_default_str();
  cl->add_option("--cloudlet", cl_cloudlet)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  cl->add_option("--gate-devices", cl_gates)->capture_default_str();
  cl->add_option("--annealers", cl_annealers)->capture_default_str();
  cl->add_option("--queue-overhead", cl_overhead, "seconds added to every submission")->capture_default_str();
  cl->add_option("--local-latency", cl_local, "cloudlet round trip in seconds")->capture_default_str();
  cl->add_option("--events", cl_events, "event-log CSV")->capture_default_str();
  add_common(cl, cl_c, "metrics JSON (default stdout)");

  std::string cfg_path, cfg_out;
  auto* runc = app.add_subcommand("run", "run an experiment config; prints the result summary JSON");
  runc->add_option("--config", cfg_path, "experiment config JSON")->required();
  runc->add_option("--out", cfg_out, "output directory (overrides the config)");

  std::string show;
  std::vector<std::string> to_run;
  int jobs = 1;
  std::string presets_out = "results";
  auto* pre = app.add_subcommand("presets", "list shipped presets, show one, or run them");
  pre->add_option("--show", show, "print a preset's config JSON");
  pre->add_option("--run", to_run, "preset names, or 'all'");
  pre->add_option("--jobs", jobs, "presets run concurrently")->capture_default_str();
  pre->add_option("--out", presets_out, "results root directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*walk) {
      const auto b = run_config("walk", {{"kind", walk_kind}, {"states", walk_states}, {"steps", walk_steps}, {"shots", walk_shots}}, walk_c);
      finish(b, "probabilities", walk_c);
    } else if (*solve) {
      const auto b = run_config("qubo-solve", {{"input", qubo_in}, {"reads", qubo_reads}, {"sweeps", qubo_sweeps}, {"method", qubo_method}}, qubo_c);
      if (!qubo_c.out.empty()) {
        finish(b, "samples", qubo_c);
      } else {
        const auto& t = b.tables.at("samples");
        json samples = json::array();
        for (const auto& row : t.rows) samples.push_back({{"assignment", row[0]}, {"energy", row[1]}, {"occurrences", row[2]}});
        json out = b.metrics;
        out["samples"] = samples;
        std::cout << out.dump(2) << '\n';
      }
    } else if (*mp) {
      const auto b = run_config("mpmw",
                                {{"solver", mp_solver}, {"k", mp_k}, {"positions", mp_positions}, {"dx", mp_dx}, {"optimizer", mp_opt}, {"max_iters", mp_iters}},
                                mp_c);
      finish(b, "trace", mp_c);
    } else if (*pp) {
      const auto b = run_config("pp",
                                {{"train", pp_train},
                                 {"test", pp_test},
                                 {"epochs", pp_epochs},
                                 {"strategy", pp_strategy},
                                 {"k", pp_k},
                                 {"sampler", pp_sampler},
                                 {"reads", pp_reads}},
                                pp_c);
      finish(b, "metrics", pp_c);
    } else if (*lca) {
      const auto b = run_config(
          "lca", {{"steps", lca_steps}, {"unroll", lca_unroll}, {"solver", lca_solver}, {"reads", lca_reads}, {"sweeps", lca_sweeps}}, lca_c);
      finish(b, "trace", lca_c);
    } else if (*cl) {
      const auto b = run_config("cloud",
                                {{"workload", cl_workload},
                                 {"policy", cl_policy},
                                 {"cloudlet", cl_cloudlet == "on"},
                                 {"gate_devices", cl_gates},
                                 {"annealers", cl_annealers},
                                 {"queue_overhead_s", cl_overhead},
                                 {"local_latency_s", cl_local}},
                                cl_c);
      write_table(b.tables.at("events"), cl_events);
      if (cl_c.out.empty() || cl_c.out == "-") {
        std::cout << b.metrics.dump(2) << '\n';
      } else {
        std::ofstream f(cl_c.out);
        if (!f) throw std::runtime_error("cannot write '" + cl_c.out + "'");
        f << b.metrics.dump(2) << '\n';
      }
    } else if (*runc) {
      auto cfg = with_env_seed(ExperimentConfig::load(cfg_path));
      if (!cfg_out.empty()) cfg.output = cfg_out;
      std::cout << run(cfg).summary().dump(2) << '\n';
    } else if (*pre) {
      if (!show.empty()) {
        std::cout << resolve(find_preset(show).experiment_config()).to_json().dump(2) << '\n';
        return 0;
      }
      if (!to_run.empty()) return run_presets(to_run, jobs, presets_out);
      return list_presets();
    }
  } catch (const std::exception& e) {
    std::cerr << "quatro: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
