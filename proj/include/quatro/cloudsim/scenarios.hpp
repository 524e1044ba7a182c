#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quatro/cloudsim/sim.hpp"

namespace quatro::cloudsim {

/// Serial (pinned, one device) against fanned-out (least-loaded) execution of
/// one batch job.
struct BatchSpeedup {
  double serial_s = 0.0;
  double parallel_s = 0.0;
  double speedup() const { return serial_s / parallel_s; }
};

inline BatchSpeedup batch_speedup(const std::vector<double>& instance_s, int n_devices, double queue_overhead_s = 0.0) {
  if (n_devices < 1) throw std::invalid_argument("batch_speedup: need at least one device");
  const std::vector<Job> w{batch_job(0, 0.0, instance_s)};
  const auto devices = identical_devices(n_devices);
  Policy p;
  p.queue_overhead_s = queue_overhead_s;
  BatchSpeedup out;
  out.serial_s = simulate(w, devices, p).metrics.makespan_s();
  p.frontend = Frontend::least_loaded;
  out.parallel_s = simulate(w, devices, p).metrics.makespan_s();
  return out;
}

struct RbmScenarioRow {
  std::string name;  // serial, parallel, mixed
  int k_train = 1;
  int k_test = 1;
  double train_s = 0.0;
  double test_s = 0.0;
  double total_s() const { return train_s + test_s; }
};

struct RbmScenario {
  int k = 1;
  std::vector<RbmScenarioRow> rows;  // serial first

  const RbmScenarioRow& row(const std::string& name) const {
    for (const auto& r : rows) {
      if (r.name == name) return r;
    }
    throw std::out_of_range("RbmScenario: no row '" + name + "'");
  }
  double train_ratio() const { return row("serial").train_s / row("parallel").train_s; }
  double total_ratio(const std::string& name) const { return row("serial").total_s() / row(name).total_s(); }
};

namespace detail {
// One annealer runs ceil(samples / k) packed problems per pass back to back;
// training passes depend on the previous update, so they form one iterative job.
inline double annealer_time(int k, double per_sample_s, int passes, int samples) {
  if (samples < 1) return 0.0;
  const int packed = (samples + k - 1) / k;
  std::vector<Job> jobs{iterative_job(0, 0.0, passes * packed, per_sample_s, 0.0, 0.0)};
  jobs[0].target = DeviceKind::annealer;
  return simulate(jobs, identical_devices(1, DeviceKind::annealer), Policy{}).metrics.makespan_s();
}
}  // namespace detail

/// Training and test time when K samples share one anneal at unchanged
/// service time. Rows: serial (K=1 throughout), parallel (K throughout) and
/// mixed (serial training, parallel testing).
inline RbmScenario rbm_batch_scenario(int k, double per_sample_s, int epochs, int train_samples, int test_samples = -1) {
  if (k < 1) throw std::invalid_argument("rbm_batch_scenario: K must be >= 1");
  if (!(per_sample_s > 0.0) || epochs < 1 || train_samples < 1) {
    throw std::invalid_argument("rbm_batch_scenario: need positive service time, epochs and samples");
  }
  if (test_samples < 0) test_samples = train_samples;
  RbmScenario out;
  out.k = k;
  auto row = [&](const char* name, int kt, int ke) {
    RbmScenarioRow r;
    r.name = name;
    r.k_train = kt;
    r.k_test = ke;
    r.train_s = detail::annealer_time(kt, per_sample_s, epochs, train_samples);
    r.test_s = detail::annealer_time(ke, per_sample_s, 1, test_samples);
    out.rows.push_back(r);
  };
  row("serial", 1, 1);
  row("parallel", k, k);
  row("mixed", 1, k);
  return out;
}

/// Shipped service-time calibration. SSVQE instance times are the mpmw
/// state-preparation counts times per_circuit_s; the queue overhead is the
/// assumed per-submission cost that brings three-way fan-out below the ideal 3x.
struct CloudCalibration {
  double per_circuit_s = 0.01;
  double queue_overhead_s = 20.0;
  int devices = 3;
  std::vector<int> ssvqe_k{0, 1, 2};
  int ssvqe_max_iters = 500;
  std::uint64_t ssvqe_seed = 0;
  std::vector<long> ssvqe_state_preparations{1000, 2000, 3000};
  double rbm_per_sample_s = 0.06;
  int rbm_epochs = 30;
  int rbm_train_samples = 100;
  int rbm_test_samples = 100;
  int rbm_k = 10;

  void validate() const {
    if (!(per_circuit_s > 0.0) || !(queue_overhead_s >= 0.0) || devices < 1) throw std::invalid_argument("CloudCalibration: bad service parameters");
    if (ssvqe_k.empty() || ssvqe_k.size() != ssvqe_state_preparations.size()) {
      throw std::invalid_argument("CloudCalibration: need one state-preparation count per SSVQE instance");
    }
    if (!(rbm_per_sample_s > 0.0) || rbm_epochs < 1 || rbm_train_samples < 1 || rbm_test_samples < 1 || rbm_k < 1) {
      throw std::invalid_argument("CloudCalibration: bad RBM scenario parameters");
    }
  }

  std::vector<double> instance_times(const std::vector<long>& preparations) const {
    std::vector<double> out;
    for (long n : preparations) out.push_back(static_cast<double>(n) * per_circuit_s);
    return out;
  }
  std::vector<double> instance_times() const { return instance_times(ssvqe_state_preparations); }

  static CloudCalibration from_json(const nlohmann::json& j) {
    CloudCalibration c;
    c.per_circuit_s = j.at("per_circuit_s").get<double>();
    c.queue_overhead_s = j.at("queue_overhead_s").get<double>();
    c.devices = j.at("devices").get<int>();
    const auto& s = j.at("ssvqe");
    c.ssvqe_k = s.at("k").get<std::vector<int>>();
    c.ssvqe_max_iters = s.at("max_iters").get<int>();
    c.ssvqe_seed = s.at("seed").get<std::uint64_t>();
    c.ssvqe_state_preparations = s.at("state_preparations").get<std::vector<long>>();
    const auto& r = j.at("rbm");
    c.rbm_per_sample_s = r.at("per_sample_s").get<double>();
    c.rbm_epochs = r.at("epochs").get<int>();
    c.rbm_train_samples = r.at("train_samples").get<int>();
    c.rbm_test_samples = r.at("test_samples").get<int>();
    c.rbm_k = r.at("k").get<int>();
    c.validate();
    return c;
  }

  static CloudCalibration load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calibration '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("calibration '" + path + "': " + e.what());
    }
  }
};

}  // namespace quatro::cloudsim
