#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "quatro/cloudsim/io.hpp"
#include "quatro/cloudsim/scenarios.hpp"
#include "quatro/cloudsim/sim.hpp"
#include "quatro/harness/registry.hpp"
#include "quatro/lca/lca.hpp"
#include "quatro/mpmw/lanczos.hpp"
#include "quatro/mpmw/qite.hpp"
#include "quatro/mpmw/ssvqe.hpp"
#include "quatro/mpmw/well.hpp"
#include "quatro/qcore/evolve.hpp"
#include "quatro/qcore/pauli.hpp"
#include "quatro/qcore/rng.hpp"
#include "quatro/qcore/state.hpp"
#include "quatro/qubo/anneal.hpp"
#include "quatro/qubo/encode.hpp"
#include "quatro/qubo/quadratize.hpp"
#include "quatro/qubo/qubo.hpp"
#include "quatro/rbmpp/game.hpp"
#include "quatro/rbmpp/train.hpp"
#include "quatro/walks/walk.hpp"

namespace quatro::harness {

namespace detail {

inline bool nonincreasing(const std::vector<double>& v, double tol = 1e-12) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] + tol) return false;
  }
  return true;
}

inline std::string bitstring(const qubo::Bits& b) {
  std::string s;
  for (auto x : b) s += x ? '1' : '0';
  return s;
}

inline double relative_error(double est, double exact) { return std::abs(est - exact) / std::abs(exact); }

// --- walks ---------------------------------------------------------------

inline void emit_walk(Run& r, const std::string& name, const walks::WalkResult& w) {
  auto& t = r.table(name, {"timestep", "state", "probability"});
  for (std::size_t s = 0; s < w.probabilities.size(); ++s) {
    for (std::size_t i = 0; i < w.probabilities[s].size(); ++i) t.add({s, i, w.probabilities[s][i]});
  }
}

inline walks::WalkModel walk_model(const Params& p) {
  walks::WalkModel m;
  m.n_states = p.at_least("states", 2);
  m.drift = p.num("drift");
  m.coupling = p.num("coupling");
  m.dt = p.num("dt");
  m.validate();
  return m;
}

inline void walk(Run& r) {
  const auto& p = r.p;
  const std::string kind = p.choice("kind", {"reflecting", "absorbing"});
  const auto m = walk_model(p);
  const int steps = p.at_least("steps", 0);
  const int shots = p.at_least("shots", 0);
  const auto psi0 = walks::default_initial_state(m.n_states);

  if (kind == "reflecting") {
    const auto exact = walks::reflecting_walk(m, psi0, steps);
    double drift = 0;
    for (double s : exact.survival) drift = std::max(drift, std::abs(s - 1.0));
    r.out.metrics["max_norm_deviation"] = drift;
    if (shots == 0) {
      emit_walk(r, "probabilities", exact);
      return;
    }
    // Measurement at each timestep of an independently prepared state.
    walks::WalkResult sampled;
    sampled.shots = static_cast<std::size_t>(shots);
    double worst = 0;
    for (std::size_t t = 0; t < exact.probabilities.size(); ++t) {
      const auto cdf = cumulative_sum(exact.probabilities[t]);
      Rng rng(r.seed, t);
      std::vector<double> f(cdf.size(), 0.0);
      for (int s = 0; s < shots; ++s) f[draw_index(cdf, rng)] += 1.0 / shots;
      worst = std::max(worst, total_variation(exact.probabilities[t], f));
      sampled.push(std::move(f));
    }
    emit_walk(r, "probabilities", sampled);
    emit_walk(r, "exact", exact);
    r.out.metrics["max_tv"] = worst;
    return;
  }

  const auto exact = walks::absorbing_walk_exact(m, psi0, steps);
  bool ok = nonincreasing(exact.survival);
  if (shots == 0) {
    emit_walk(r, "probabilities", exact);
    auto& s = r.table("survival", {"timestep", "survival"});
    for (std::size_t t = 0; t < exact.survival.size(); ++t) s.add({t, exact.survival[t]});
    r.out.metrics["survival_nonincreasing"] = ok;
    return;
  }
  const auto sampled = walks::absorbing_walk_sampled(m, psi0, steps, static_cast<std::size_t>(shots), r.seed);
  ok = ok && nonincreasing(sampled.survival);
  emit_walk(r, "probabilities", sampled);
  emit_walk(r, "exact", exact);
  auto& c = r.table("comparison", {"timestep", "tv", "survival_exact", "survival_sampled", "accepted"});
  double worst = 0;
  std::vector<double> tvs;
  for (std::size_t t = 0; t < exact.probabilities.size(); ++t) {
    // Rejected runs are kept as one extra outcome so both rows are full distributions.
    const double tv = total_variation(walks::with_rejected(exact.probabilities[t]), walks::with_rejected(sampled.probabilities[t]));
    worst = std::max(worst, tv);
    tvs.push_back(tv);
    c.add({t, tv, exact.survival[t], sampled.survival[t], sampled.accepted[t]});
  }
  r.out.metrics["tv"] = tvs;
  r.out.metrics["max_tv"] = worst;
  r.out.metrics["survival_nonincreasing"] = ok;
}

inline void walk_noise(Run& r) {
  const auto& p = r.p;
  const auto m = walk_model(p);
  const int t = p.at_least("timestep", 1);
  const int traj = p.at_least("trajectories", 1);
  auto ps = p.nums("p");
  if (ps.empty()) throw std::invalid_argument("walk-noise: need at least one noise level");
  const auto psi0 = walks::default_initial_state(m.n_states);
  const auto ideal = walks::with_rejected(walks::absorbing_walk_exact(m, psi0, t).probabilities.back());
  std::vector<std::pair<double, double>> rows;  // (p, tv)
  auto& tab = r.table("noise", {"p", "tv", "rejected"});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto noisy = walks::absorbing_walk_noisy(m, psi0, t, NoiseModel{ps[i], ps[i]}, static_cast<std::size_t>(traj), mix_seed(r.seed, i));
    const double tv = total_variation(ideal, noisy);
    rows.emplace_back(ps[i], tv);
    tab.add({ps[i], tv, noisy.back()});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  bool strict = true;
  for (std::size_t i = 1; i < rows.size(); ++i) strict = strict && rows[i].second < rows[i - 1].second && rows[i].first < rows[i - 1].first;
  r.out.metrics["ideal_rejected"] = ideal.back();
  r.out.metrics["tv_strictly_decreasing"] = strict;
  r.out.metrics["tv_at_smallest_p"] = rows.back().second;
  r.out.metrics["smallest_p"] = rows.back().first;
}

inline void walk_anneal(Run& r) {
  const auto& p = r.p;
  const auto h = walks::build_walk_hamiltonian(walks::calibrated_walk_model());
  const int n = walks::calibrated_walk_model().n_states;
  const double ground = eigenvalues(h.dense()).front();
  auto& tab = r.table("encoding", {"method", "r", "n_vars", "objective", "energy", "error"});
  std::vector<double> errors;
  for (int bits : p.ints("r")) {
    const qubo::AmplitudeEncoding enc(n, bits);
    const auto s = qubo::solve_encoded_exact(h, enc);
    errors.push_back(s.energy - ground);
    tab.add({"brute", bits, enc.n_vars(), s.objective, s.energy, s.energy - ground});
  }
  const qubo::AmplitudeEncoding enc(n, p.at_least("sa_r", 2));
  const auto poly = qubo::encode_ground_state_problem(h, enc);
  const auto qz = qubo::quadratize(poly);
  const auto best = qubo::simulated_anneal(qz.qubo, p.at_least("reads", 1), qubo::AnnealSchedule::with_pause(p.at_least("sweeps", 1)), r.seed).best();
  const auto sa = qubo::decode_solution(h, enc, poly, qz.project(best.assignment));
  const double floor = qubo::brute_force_min(poly).value;
  tab.add({"sa", enc.r, qz.qubo.n_vars(), sa.objective, sa.energy, sa.energy - ground});
  r.out.metrics["ground_energy"] = ground;
  r.out.metrics["exact_errors"] = errors;
  r.out.metrics["error_nonincreasing"] = nonincreasing(errors);
  r.out.metrics["sa_objective"] = sa.objective;
  r.out.metrics["brute_objective"] = floor;
  r.out.metrics["sa_relative_gap"] = relative_error(sa.objective, floor);
}

// --- mpmw ----------------------------------------------------------------

inline mpmw::WellModel well(const Params& p) {
  mpmw::WellModel w;
  w.n_positions = p.at_least("positions", 2);
  w.dx = p.num("dx");
  w.validate();
  return w;
}

inline void mpmw_spectrum(Run& r) {
  const auto ev = eigenvalues(mpmw::build_well_hamiltonian(well(r.p)).dense());
  auto& t = r.table("spectrum", {"index", "eigenvalue"});
  for (std::size_t i = 0; i < ev.size(); ++i) t.add({i, ev[i]});
  r.out.metrics["eigenvalues"] = ev;
}

inline mpmw::SsvqeConfig ssvqe_config(const std::string& variant, const std::string& optimizer, int k, int iters, std::uint64_t seed) {
  mpmw::SsvqeConfig c;
  c.variant = variant == "B" ? mpmw::SsvqeVariant::B : mpmw::SsvqeVariant::C;
  c.optimizer = optimizer == "spsa" ? mpmw::OptimizerKind::Spsa : mpmw::OptimizerKind::Simplex;
  c.k = k;
  c.max_iters = iters;
  c.seed = seed;
  return c;
}

inline void check_k(int k, const mpmw::WellModel& w) {
  if (k < 0 || k >= w.n_positions) throw std::invalid_argument("k must lie in [0, " + std::to_string(w.n_positions - 1) + "], got " + std::to_string(k));
}

inline void ssvqe(Run& r) {
  const auto& p = r.p;
  const auto w = well(p);
  const auto h = mpmw::build_well_hamiltonian(w);
  const auto ev = eigenvalues(h.dense());
  const std::string variant = p.choice("variant", {"B", "C"});
  const std::string opt = p.choice("optimizer", {"spsa", "simplex"});
  const int seeds = p.at_least("seeds", 1);
  mpmw::Ansatz a;
  a.n_qubits = w.n_qubits();
  auto& est = r.table("estimates", {"k", "estimate", "exact", "relative_error", "objective_evaluations", "state_preparations"});
  auto& tr = r.table("trace", {"k", "iteration", "cost", "energy", "evaluations"});
  double worst = 0;
  std::vector<double> values;
  for (int k : p.ints("k")) {
    check_k(k, w);
    const auto res = mpmw::ssvqe_best_of(h, ssvqe_config(variant, opt, k, p.at_least("max_iters", 1), r.seed), a, seeds);
    const double e = res.estimates.back();
    const double err = relative_error(e, ev[static_cast<std::size_t>(k)]);
    worst = std::max(worst, err);
    values.push_back(e);
    est.add({k, e, ev[static_cast<std::size_t>(k)], err, res.objective_evaluations, res.state_preparations});
    for (const auto& row : res.trace) tr.add({k, row.iteration, row.cost, row.energies.back(), row.evaluations});
  }
  r.out.metrics["estimates"] = values;
  r.out.metrics["max_relative_error"] = worst;
}

inline void qite_lanczos(Run& r) {
  const auto& p = r.p;
  const auto w = well(p);
  const auto h = mpmw::build_well_hamiltonian(w);
  const auto ev = eigenvalues(h.dense());
  mpmw::QiteConfig qc;
  qc.dtau = p.num("dtau");
  qc.steps = p.at_least("steps", 1);
  const auto q = mpmw::qite_evolve(h, StateVector(w.n_qubits()), qc);
  auto& qt = r.table("qite", {"step", "energy", "evaluations"});
  for (std::size_t i = 0; i < q.energies.size(); ++i) qt.add({i, q.energies[i], i});
  const int k = p.at_least("lanczos_k", 0);
  check_k(k, w);
  const auto est = mpmw::quantum_lanczos(h, q.states, {k});
  auto& et = r.table("estimates", {"index", "estimate", "exact", "relative_error"});
  std::vector<double> errs;
  for (std::size_t i = 0; i < est.size(); ++i) {
    errs.push_back(relative_error(est[i], ev[i]));
    et.add({i, est[i], ev[i], errs.back()});
  }
  // The variational comparison runs at the same accuracy target: variant C
  // resolving all states up to k, best of the same seed count as the SSVQE claim.
  const int ck = p.at_least("compare_k", 0);
  check_k(ck, w);
  mpmw::Ansatz a;
  a.n_qubits = w.n_qubits();
  const auto c = mpmw::ssvqe_best_of(h, ssvqe_config("C", "spsa", ck, p.at_least("compare_iters", 1), r.seed), a, p.at_least("compare_seeds", 1));
  auto& ct = r.table("evaluations", {"method", "state_preparations"});
  ct.add({"qite", q.evaluations});
  ct.add({"ssvqe-c-spsa", c.state_preparations});
  r.out.metrics["estimates"] = est;
  r.out.metrics["relative_errors"] = errs;
  r.out.metrics["qite_evaluations"] = q.evaluations;
  r.out.metrics["ssvqe_c_evaluations"] = c.state_preparations;
  r.out.metrics["evaluation_ratio"] = static_cast<double>(c.state_preparations) / static_cast<double>(q.evaluations);
  r.out.metrics["qite_monotone"] = nonincreasing(q.energies, 1e-10);
}

/// One solve with its optimizer trace; the CLI's mpmw command.
inline void mpmw_solve(Run& r) {
  const auto& p = r.p;
  const auto w = well(p);
  const auto h = mpmw::build_well_hamiltonian(w);
  const auto ev = eigenvalues(h.dense());
  const std::string solver = p.choice("solver", {"ssvqe-b", "ssvqe-c", "qite"});
  const int k = p.at_least("k", 0);
  check_k(k, w);
  std::vector<std::string> cols{"iteration", "cost"};
  const int tracked = solver == "qite" ? 1 : k + 1;
  for (int j = 0; j < tracked; ++j) cols.push_back("E" + std::to_string(j));
  cols.push_back("evaluations");
  auto& t = r.table("trace", cols);
  if (solver == "qite") {
    mpmw::QiteConfig qc;
    qc.dtau = p.num("dtau");
    qc.steps = p.at_least("steps", 1);
    const auto q = mpmw::qite_evolve(h, StateVector(w.n_qubits()), qc);
    for (std::size_t i = 0; i < q.energies.size(); ++i) t.add({i, q.energies[i], q.energies[i], i});
    r.out.metrics["estimates"] = mpmw::quantum_lanczos(h, q.states, {k});
    r.out.metrics["state_preparations"] = q.evaluations;
  } else {
    auto cfg = ssvqe_config(solver == "ssvqe-b" ? "B" : "C", p.choice("optimizer", {"spsa", "simplex"}), k, p.at_least("max_iters", 1), r.seed);
    cfg.w = p.num("w");
    mpmw::Ansatz a;
    a.n_qubits = w.n_qubits();
    const auto res = mpmw::ssvqe_best_of(h, cfg, a, p.at_least("seeds", 1));
    for (const auto& row : res.trace) {
      std::vector<json> cells{row.iteration, row.cost};
      for (double e : row.energies) cells.push_back(e);
      cells.push_back(row.evaluations);
      t.add(std::move(cells));
    }
    r.out.metrics["estimates"] = res.estimates;
    r.out.metrics["state_preparations"] = res.state_preparations;
  }
  r.out.metrics["exact"] = ev;
}

// --- rbmpp ---------------------------------------------------------------

inline rbmpp::TrainConfig train_config(const Params& p, std::uint64_t seed) {
  rbmpp::TrainConfig cfg;
  cfg.epochs = p.at_least("epochs", 0);
  cfg.seed = seed;
  cfg.sampler.kind = p.choice("sampler", {"exact", "anneal"}) == "exact" ? rbmpp::SamplerKind::exact : rbmpp::SamplerKind::anneal;
  return cfg;
}

inline void predator_prey(Run& r) {
  const auto& p = r.p;
  const auto train = rbmpp::make_dataset(p.at_least("train", 1), static_cast<std::uint64_t>(p.at_least("train_seed", 0)));
  const auto test = rbmpp::make_dataset(p.at_least("test", 1), static_cast<std::uint64_t>(p.at_least("test_seed", 0)));
  const auto cfg = train_config(p, r.seed);
  const auto s = rbmpp::Strategy::parse(p.choice("strategy", {"standard", "combined", "parallel"}), p.at_least("k", 1));
  const auto tr = rbmpp::cd_train(rbmpp::RbmModel::random(r.seed), train, cfg, s);
  const auto ev = rbmpp::evaluate(tr.model, test, s, cfg.sampler, r.seed, p.at_least("reads", 1));
  auto& t = r.table("metrics", {"epoch", "train_accuracy", "reconstruction_error", "sampler_calls"});
  for (const auto& e : tr.epochs) t.add({e.epoch, e.train_accuracy, e.reconstruction_error, e.sampler_calls});
  r.out.metrics["test_accuracy"] = ev.accuracy;
  r.out.metrics["fallbacks"] = ev.fallbacks;
  r.out.metrics["train_anneals"] = tr.sampler_calls;
  r.out.metrics["test_anneals"] = ev.sampler_calls;
}

inline void rbm_parallel(Run& r) {
  const auto& p = r.p;
  const auto train = rbmpp::make_dataset(p.at_least("train", 1), static_cast<std::uint64_t>(p.at_least("train_seed", 0)));
  const auto test = rbmpp::make_dataset(p.at_least("test", 1), static_cast<std::uint64_t>(p.at_least("test_seed", 0)));
  const int seeds = p.at_least("seeds", 1);
  const int reads = p.at_least("reads", 1);
  const auto ks = p.ints("k");
  if (ks.empty() || ks.front() != 1) throw std::invalid_argument("rbm-parallel: the first K must be 1 (the serial baseline)");
  auto& t = r.table("accuracy", {"k", "seed", "accuracy", "fallbacks", "train_anneals", "test_anneals"});
  auto& m = r.table("summary", {"k", "mean_accuracy", "delta_vs_serial", "min_accuracy"});
  double base = 0, worst_delta = 0, floor = 1;
  json means = json::object();
  for (int k : ks) {
    const auto s = rbmpp::Strategy::parse("parallel", k);
    double mean = 0, low = 1;
    for (int i = 0; i < seeds; ++i) {
      const std::uint64_t seed = r.seed + static_cast<std::uint64_t>(i);
      const auto cfg = train_config(p, seed);
      const auto tr = rbmpp::cd_train(rbmpp::RbmModel::random(seed), train, cfg, s);
      const auto ev = rbmpp::evaluate(tr.model, test, s, cfg.sampler, seed, reads);
      t.add({k, seed, ev.accuracy, ev.fallbacks, tr.sampler_calls, ev.sampler_calls});
      mean += ev.accuracy / seeds;
      low = std::min(low, ev.accuracy);
    }
    if (k == ks.front()) base = mean;
    worst_delta = std::max(worst_delta, std::abs(mean - base));
    floor = std::min(floor, low);
    means[std::to_string(k)] = mean;
    m.add({k, mean, mean - base, low});
  }
  r.out.metrics["mean_accuracy"] = means;
  r.out.metrics["max_delta_vs_serial"] = worst_delta;
  r.out.metrics["min_accuracy"] = floor;
}

// --- lca -----------------------------------------------------------------

inline void emit_lca(Table& t, const lca::LcaTrace& tr, const std::string& method) {
  for (int s = 1; s <= tr.steps(); ++s) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto i = static_cast<std::size_t>(s) - 1;
      t.add({s, j + 1, tr.x[i][j], tr.f[i][j], method});
    }
  }
}

inline void lca_experiment(Run& r) {
  const auto& p = r.p;
  lca::LcaParams lp;
  lp.leak = p.num("leak");
  lp.inhibition = p.num("inhibition");
  lp.x0 = p.num("x0");
  lp.validate();
  const int steps = p.at_least("steps", 1);
  const int unroll = p.at_least("unroll", 1);
  const auto inputs = lca::constant_inputs(steps, p.num("input1"), p.num("input2"));
  const lca::Pair x_init{p.num("x1_init"), p.num("x2_init")};
  const std::string solver = p.choice("solver", {"exact", "sa", "brute"});
  lca::LcaTrace trace;
  if (solver == "exact") {
    trace = lca::lca_exact(lp, inputs, steps, x_init);
  } else {
    const auto s = solver == "sa" ? lca::sa_solver(p.at_least("reads", 1), qubo::AnnealSchedule::with_pause(p.at_least("sweeps", 1)), r.seed)
                                  : lca::brute_force_solver();
    trace = lca::lca_chained(lp, inputs, steps, unroll, s, x_init);
  }
  const auto ref = lca::local_reference(lp, inputs, trace, true);
  const auto err = lca::mean_local_relative_error(ref, trace);
  auto& t = r.table("trace", {"t", "unit", "x", "f", "method"});
  emit_lca(t, trace, solver);
  emit_lca(t, ref, "reference");

  // Single-step brute force against the quantization floor.
  const auto one = lca::build_lca_qubo(lp, lca::Inputs(inputs.begin(), inputs.begin() + 1), 1, x_init);
  const auto got = one.decode(lca::brute_force_solver()(one, 0));
  const auto lin = lca::lca_step_linear(lp, inputs.front(), x_init);
  double dev = 0;
  for (std::size_t j = 0; j < 2; ++j) dev = std::max(dev, std::abs(got.x[0][j] - lin[j]));
  const double half = one.layout.resolution() / 2;

  r.out.metrics["error_percent"] = {err.percent[0], err.percent[1]};
  r.out.metrics["solves"] = solver == "exact" ? 0 : (steps + unroll - 1) / unroll;
  r.out.metrics["value_vars_per_solve"] = lca::build_lca_qubo(lp, lca::Inputs(inputs.begin(), inputs.begin() + std::min(unroll, steps)),
                                                              std::min(unroll, steps), x_init)
                                              .n_value_vars();
  r.out.metrics["bound_max_deviation"] = dev;
  r.out.metrics["half_resolution"] = half;
  r.out.metrics["bound_met"] = dev <= half;
}

// --- cloudsim ------------------------------------------------------------

inline std::filesystem::path calibration_path(const Params& p) {
  const std::string c = p.str("calibration");
  return c.empty() ? data_dir() / "cloud_calibration.json" : std::filesystem::path(c);
}

inline void cloud(Run& r) {
  const auto& p = r.p;
  const std::string path = p.str("workload");
  if (path.empty()) throw std::invalid_argument("cloud: 'workload' (CSV path) is required");
  r.inputs.push_back(path);
  const auto w = cloudsim::ingest_workload(path);
  cloudsim::Policy pol;
  pol.frontend = cloudsim::parse_frontend(p.choice("policy", {"pinned", "least-loaded", "preference"}));
  pol.cloudlet = p.flag("cloudlet");
  pol.queue_overhead_s = p.num("queue_overhead_s");
  pol.local_latency_s = p.num("local_latency_s");
  pol.jitter = p.num("jitter");
  std::vector<cloudsim::Device> devs = cloudsim::identical_devices(p.at_least("gate_devices", 0));
  for (int i = 0, n = p.at_least("annealers", 0); i < n; ++i) devs.push_back({static_cast<int>(devs.size()), cloudsim::DeviceKind::annealer, 0.0, 0.0});
  const auto res = cloudsim::simulate(w, devs, pol, r.seed);
  auto& jt = r.table("jobs", {"job_id", "arrival_s", "first_start_s", "completion_s", "wait_s", "turnaround_s"});
  double turn = 0, wait = 0;
  for (const auto& j : res.metrics.jobs) {
    jt.add({j.id, j.arrival_s, j.first_start_s, j.completion_s, j.wait_s, j.turnaround_s()});
    turn += j.turnaround_s();
    wait += j.wait_s;
  }
  auto& dt = r.table("devices", {"device", "busy_s", "segments", "utilization"});
  for (const auto& d : res.metrics.devices) dt.add({d.id, d.busy_s, d.segments, d.utilization});
  auto& et = r.table("events", {"time_s", "job_id", "instance", "iteration", "event", "device"});
  for (const auto& e : res.log) et.add({e.time, e.job, e.instance, e.iteration, cloudsim::to_string(e.kind), e.device});
  const double n = std::max<std::size_t>(1, res.metrics.jobs.size());
  r.out.metrics = cloudsim::to_json(res.metrics);
  r.out.metrics["mean_turnaround_s"] = turn / n;
  r.out.metrics["mean_wait_s"] = wait / n;
}

inline void cloud_speedup(Run& r) {
  const auto path = calibration_path(r.p);
  r.inputs.push_back(path);
  const auto cal = cloudsim::CloudCalibration::load(path.string());
  auto& t = r.table("speedups", {"scenario", "serial_s", "parallel_s", "speedup"});
  const auto inst = cal.instance_times();
  const auto batch = cloudsim::batch_speedup(inst, cal.devices, cal.queue_overhead_s);
  t.add({"ssvqe-batch", batch.serial_s, batch.parallel_s, batch.speedup()});
  const double mean = std::accumulate(inst.begin(), inst.end(), 0.0) / static_cast<double>(inst.size());
  const auto ideal = cloudsim::batch_speedup(std::vector<double>(static_cast<std::size_t>(cal.devices), mean), cal.devices, 0.0);
  t.add({"equal-batch-no-overhead", ideal.serial_s, ideal.parallel_s, ideal.speedup()});
  const auto rbm = cloudsim::rbm_batch_scenario(cal.rbm_k, cal.rbm_per_sample_s, cal.rbm_epochs, cal.rbm_train_samples, cal.rbm_test_samples);
  const auto& serial = rbm.row("serial");
  for (const auto& row : rbm.rows) {
    if (row.name == "serial") continue;
    t.add({"rbm-" + row.name + "-train", serial.train_s, row.train_s, serial.train_s / row.train_s});
    t.add({"rbm-" + row.name + "-total", serial.total_s(), row.total_s(), serial.total_s() / row.total_s()});
  }
  r.out.metrics["ssvqe_batch_speedup"] = batch.speedup();
  r.out.metrics["equal_batch_speedup"] = ideal.speedup();
  r.out.metrics["rbm_train_speedup"] = rbm.train_ratio();
  r.out.metrics["rbm_total_speedup"] = rbm.total_ratio("parallel");
}

// --- qubo ----------------------------------------------------------------

inline void qubo_solve(Run& r) {
  const auto& p = r.p;
  const std::string path = p.str("input");
  if (path.empty()) throw std::invalid_argument("qubo-solve: 'input' (QUBO JSON path) is required");
  r.inputs.push_back(path);
  qubo::Qubo q;
  try {
    q = qubo::Qubo::from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  const std::string method = p.choice("method", {"sa", "brute"});
  const auto set = method == "brute" ? qubo::brute_force_min(q, static_cast<std::size_t>(p.at_least("keep", 1)))
                                     : qubo::simulated_anneal(q, p.at_least("reads", 1), qubo::AnnealSchedule::with_pause(p.at_least("sweeps", 1)), r.seed);
  auto& t = r.table("samples", {"assignment", "energy", "occurrences"});
  for (const auto& s : set.records()) t.add({bitstring(s.assignment), s.energy, s.occurrences});
  r.out.metrics["best_energy"] = set.best().energy;
  r.out.metrics["best_assignment"] = bitstring(set.best().assignment);
  r.out.metrics["n_vars"] = q.n_vars();
}

// --- property suite ------------------------------------------------------

struct PropertyTally {
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // largest violation margin seen (0 when none)

  void check(bool ok, double margin = 0.0) {
    ++cases;
    if (!ok) ++failures;
    worst = std::max(worst, margin);
  }
};

inline Matrix random_hermitian(int n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(1) << n;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  return (a + a.adjoint()) / 2.0;
}

inline PropertyTally pauli_roundtrip(int cases, std::uint64_t seed) {
  PropertyTally t;
  Rng rng(seed, 1);
  for (int c = 0; c < cases; ++c) {
    const Matrix h = random_hermitian(1 + c % 4, rng);
    const auto s = pauli_decompose(h);
    const double e1 = (s.dense() - h).cwiseAbs().maxCoeff();
    const double e2 = (PauliSum::from_json(s.to_json()).dense() - h).cwiseAbs().maxCoeff();
    t.check(e1 <= 1e-10 && e2 <= 1e-10, std::max(e1, e2));
  }
  return t;
}

inline qubo::PseudoBooleanPoly random_poly(int n, int degree, int terms, Rng& rng) {
  qubo::PseudoBooleanPoly p(n);
  for (int k = 0; k < terms; ++k) {
    qubo::Monomial m;
    const int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(degree, n))));
    while (static_cast<int>(m.size()) < d) {
      const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (std::find(m.begin(), m.end(), v) == m.end()) m.push_back(v);
    }
    std::sort(m.begin(), m.end());
    p.add(m, rng.uniform(-2, 2));
  }
  return p;
}

inline PropertyTally quadratization_min(int cases, std::uint64_t seed) {
  PropertyTally t;
  Rng rng(seed, 2);
  for (int c = 0; c < cases; ++c) {
    qubo::PseudoBooleanPoly p;
    qubo::Quadratized q;
    do {  // keep the reduced problem within exhaustive reach
      const int n = 4 + static_cast<int>(rng.below(7));
      p = random_poly(n, 4, 2 * n, rng);
      q = qubo::quadratize(p);
    } while (q.qubo.n_vars() > 16);
    const double want = qubo::brute_force_min(p).value;
    const auto best = qubo::brute_force_min(q.qubo).best();
    const double at = p.evaluate(q.project(best.assignment));
    const double gap = std::max(std::abs(best.energy - want), std::abs(at - want));
    t.check(gap <= 1e-9 * (1 + std::abs(want)), gap);
  }
  return t;
}

inline PropertyTally sampler_determinism(int cases, std::uint64_t seed) {
  PropertyTally t;
  Rng rng(seed, 3);
  for (int c = 0; c < cases; ++c) {
    qubo::Qubo q(8);
    for (int i = 0; i < 8; ++i) {
      q.add_linear(i, rng.uniform(-1, 1));
      for (int j = i + 1; j < 8; ++j) q.add_quadratic(i, j, rng.uniform(-1, 1));
    }
    const std::uint64_t s = rng.next();
    qubo::AnnealSchedule sched;
    sched.sweeps = 100;
    const bool sa = qubo::simulated_anneal(q, 5, sched, s).to_json() == qubo::simulated_anneal(q, 5, sched, s).to_json();
    Vector a(8);
    for (auto& x : a) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const StateVector psi = StateVector::normalized(a);
    const bool meas = sample(psi, 200, s) == sample(psi, 200, s);
    t.check(sa && meas);
  }
  return t;
}

inline PropertyTally ssvqe_cost_bound(int cases, std::uint64_t seed) {
  PropertyTally t;
  const auto h = mpmw::build_well_hamiltonian({});
  for (int c = 0; c < cases; ++c) {
    auto cfg = ssvqe_config("C", c % 2 ? "simplex" : "spsa", c % 4, 40, mix_seed(seed, static_cast<std::uint64_t>(c)));
    const auto res = mpmw::ssvqe(h, cfg, {});
    const double bound = mpmw::ssvqe_cost_bound(h, cfg.effective_weights());
    double low = res.cost;
    for (const auto& row : res.trace) low = std::min(low, row.cost);
    t.check(low >= bound - 1e-9, std::max(0.0, bound - low));
  }
  return t;
}

inline PropertyTally qite_monotone(int cases, std::uint64_t seed) {
  PropertyTally t;
  Rng rng(seed, 5);
  for (int c = 0; c < cases; ++c) {
    mpmw::WellModel w;
    w.dx = rng.uniform(0.2, 0.6);
    Vector a(4);
    for (auto& x : a) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    mpmw::QiteConfig qc;
    qc.steps = 30;
    const auto q = mpmw::qite_evolve(mpmw::build_well_hamiltonian(w), StateVector::normalized(a), qc);
    double rise = 0;
    for (std::size_t i = 1; i < q.energies.size(); ++i) rise = std::max(rise, q.energies[i] - q.energies[i - 1]);
    t.check(rise <= 1e-10, rise);
  }
  return t;
}

inline std::vector<cloudsim::Job> random_workload(int n, Rng& rng) {
  std::vector<cloudsim::Job> w;
  double at = 0;
  for (int i = 0; i < n; ++i) {
    at += rng.uniform(0, 3);
    switch (rng.below(3)) {
      case 0: w.push_back(cloudsim::standalone_job(i, at, rng.uniform(0.5, 4))); break;
      case 1:
        w.push_back(cloudsim::iterative_job(i, at, 1 + static_cast<int>(rng.below(4)), rng.uniform(0.5, 2), rng.uniform(0, 1), rng.uniform(0.1, 1)));
        break;
      default: {
        std::vector<double> inst(1 + rng.below(4));
        for (double& x : inst) x = rng.uniform(0.5, 3);
        w.push_back(cloudsim::batch_job(i, at, inst));
      }
    }
  }
  return w;
}

/// Conservation: every job completes once and device busy time equals the
/// service demanded. Causality: per segment arrival <= start <= finish, no
/// iteration starts before the previous classical half ends, devices never
/// overlap and the log is time-ordered.
inline std::pair<PropertyTally, PropertyTally> cloudsim_properties(int cases, std::uint64_t seed) {
  using cloudsim::EventKind;
  PropertyTally cons, caus;
  Rng rng(seed, 6);
  const cloudsim::Frontend fronts[] = {cloudsim::Frontend::pinned, cloudsim::Frontend::least_loaded, cloudsim::Frontend::preference};
  for (int c = 0; c < cases; ++c) {
    const auto w = random_workload(20, rng);
    cloudsim::Policy pol;
    pol.frontend = fronts[c % 3];
    pol.queue_overhead_s = 0.2;
    pol.cloudlet = c % 2 == 1;
    const auto res = cloudsim::simulate(w, cloudsim::identical_devices(3), pol, static_cast<std::uint64_t>(c));

    double demand = 0;
    for (const auto& j : w) {
      if (j.kind == cloudsim::JobKind::batch) {
        for (double q : j.instances) demand += q + pol.queue_overhead_s;
      } else {
        demand += j.iterations * (j.quantum_s + pol.queue_overhead_s);
      }
    }
    double busy = 0;
    for (const auto& d : res.metrics.devices) busy += d.busy_s;
    std::map<int, int> done;
    for (const auto& e : res.log) {
      if (e.kind == EventKind::complete) ++done[e.job];
    }
    bool once = done.size() == w.size();
    for (const auto& [id, k] : done) once = once && k == 1;
    cons.check(once && std::abs(busy - demand) <= 1e-9 * demand, std::abs(busy - demand));

    std::map<int, double> arrival;
    for (const auto& j : w) arrival[j.id] = j.arrival_s;
    std::map<std::tuple<int, int, int>, double> start;
    std::map<std::pair<int, int>, double> classical_end;
    std::map<int, std::vector<std::pair<double, double>>> busy_on;
    bool ok = true;
    double last = -1;
    for (const auto& e : res.log) {
      ok = ok && e.time >= last && e.time >= arrival[e.job];
      last = e.time;
      const std::tuple<int, int, int> key{e.job, e.instance, e.iteration};
      if (e.kind == EventKind::classical_end) classical_end[{e.job, e.iteration}] = e.time;
      if (e.kind == EventKind::start) {
        start[key] = e.time;
        if (e.iteration > 0) {
          const auto it = classical_end.find({e.job, e.iteration - 1});
          ok = ok && it != classical_end.end() && e.time >= it->second;
        }
      }
      if (e.kind == EventKind::finish) {
        const auto it = start.find(key);
        ok = ok && it != start.end() && e.time >= it->second;
        if (it != start.end()) busy_on[e.device].emplace_back(it->second, e.time);
      }
    }
    for (auto& [d, iv] : busy_on) {
      std::sort(iv.begin(), iv.end());
      for (std::size_t i = 1; i < iv.size(); ++i) ok = ok && iv[i].first >= iv[i - 1].second - 1e-12;
    }
    caus.check(ok);
  }
  return {cons, caus};
}

inline void property_suite(Run& r) {
  const int cases = r.p.at_least("cases", 1);
  std::vector<std::pair<std::string, PropertyTally>> all{
      {"pauli-roundtrip", pauli_roundtrip(cases, r.seed)},
      {"quadratization-min-preserved", quadratization_min(cases, r.seed)},
      {"sampler-determinism", sampler_determinism(cases, r.seed)},
      {"ssvqe-cost-lower-bound", ssvqe_cost_bound(cases, r.seed)},
      {"qite-monotone", qite_monotone(cases, r.seed)},
  };
  const auto [cons, caus] = cloudsim_properties(cases, r.seed);
  all.emplace_back("cloudsim-conservation", cons);
  all.emplace_back("cloudsim-causality", caus);
  auto& t = r.table("properties", {"property", "cases", "failures", "worst_margin"});
  bool green = true;
  json failures = json::object();
  for (const auto& [name, tally] : all) {
    t.add({name, tally.cases, tally.failures, tally.worst});
    failures[name] = tally.failures;
    green = green && tally.failures == 0;
  }
  r.out.metrics["failures"] = failures;
  r.out.metrics["all_passed"] = green;
}

}  // namespace detail

inline const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all{
      {"walk", "quantum walk probability table (exact, or sampled with shots > 0)",
       {{"kind", "reflecting"}, {"states", 8}, {"steps", 4}, {"shots", 0}, {"drift", 0.25}, {"coupling", 1.0}, {"dt", 1.0}}, detail::walk},
      {"walk-noise", "depolarizing-noise distance from the ideal absorbing walk",
       {{"states", 8}, {"timestep", 4}, {"p", {1e-2, 1e-3, 1e-4}}, {"trajectories", 20000}, {"drift", 0.25}, {"coupling", 1.0}, {"dt", 1.0}},
       detail::walk_noise},
      {"walk-anneal", "encoded ground-state search of the calibrated 4-state walk", {{"r", {2, 3, 4}}, {"sa_r", 3}, {"reads", 100}, {"sweeps", 1000}},
       detail::walk_anneal},
      {"mpmw-spectrum", "dense spectrum of the particle-in-a-well Hamiltonian", {{"positions", 4}, {"dx", 1.0 / 3.0}}, detail::mpmw_spectrum},
      {"mpmw", "one SSVQE or QITE solve with its optimizer trace",
       {{"solver", "ssvqe-b"},
        {"k", 0},
        {"positions", 4},
        {"dx", 1.0 / 3.0},
        {"optimizer", "spsa"},
        {"max_iters", 500},
        {"seeds", 1},
        {"w", 0.5},
        {"dtau", 0.2},
        {"steps", 135}},
       detail::mpmw_solve},
      {"ssvqe", "best-of-seeds SSVQE eigenvalue estimates",
       {{"variant", "B"}, {"k", {0, 1, 2}}, {"optimizer", "spsa"}, {"max_iters", 500}, {"seeds", 5}, {"positions", 4}, {"dx", 1.0 / 3.0}},
       detail::ssvqe},
      {"qite-lanczos", "QITE ground state, Lanczos excited states and evaluation counts",
       {{"dtau", 0.2},
        {"steps", 135},
        {"lanczos_k", 2},
        {"positions", 4},
        {"dx", 1.0 / 3.0},
        {"compare_k", 2},
        {"compare_iters", 500},
        {"compare_seeds", 5}},
       detail::qite_lanczos},
      {"pp", "train and test one predator-prey RBM",
       {{"train", 100},
        {"test", 100},
        {"train_seed", 1},
        {"test_seed", 2},
        {"epochs", 30},
        {"strategy", "standard"},
        {"k", 1},
        {"sampler", "exact"},
        {"reads", 16}},
       detail::predator_prey},
      {"rbm-parallel", "test accuracy of the K-parallel RBM against serial",
       {{"k", {1, 2, 5, 10}}, {"seeds", 5}, {"train", 100}, {"test", 100}, {"train_seed", 1}, {"test_seed", 2}, {"epochs", 30}, {"sampler", "anneal"}, {"reads", 16}},
       detail::rbm_parallel},
      {"lca", "chained LCA solve against the linearized reference",
       {{"steps", 10},
        {"unroll", 5},
        {"solver", "sa"},
        {"reads", 3500},
        {"sweeps", 1000},
        {"leak", 0.4},
        {"inhibition", 0.3},
        {"x0", 0.0},
        {"input1", 0.8},
        {"input2", 0.4},
        {"x1_init", 0.0},
        {"x2_init", 0.0}},
       detail::lca_experiment},
      {"cloud", "schedule a workload CSV on simulated quantum devices",
       {{"workload", ""},
        {"policy", "least-loaded"},
        {"cloudlet", false},
        {"gate_devices", 3},
        {"annealers", 1},
        {"queue_overhead_s", 0.0},
        {"local_latency_s", 0.0},
        {"jitter", 0.0}},
       detail::cloud},
      {"cloud-speedup", "calibrated batch and RBM speedups of parallelism-aware scheduling", {{"calibration", ""}}, detail::cloud_speedup},
      {"qubo-solve", "sample a QUBO JSON file", {{"input", ""}, {"method", "sa"}, {"reads", 100}, {"sweeps", 1000}, {"keep", 1}}, detail::qubo_solve},
      {"property-suite", "randomized invariant checks across modules", {{"cases", 200}}, detail::property_suite},
  };
  return all;
}

}  // namespace quatro::harness
