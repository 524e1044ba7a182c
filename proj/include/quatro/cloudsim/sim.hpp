#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "quatro/qcore/rng.hpp"

namespace quatro::cloudsim {

enum class DeviceKind { gate, annealer };

inline const char* to_string(DeviceKind k) { return k == DeviceKind::gate ? "gate" : "annealer"; }

/// Service time of one submission = base_s + quantum_s + shots * per_shot_s.
struct Device {
  int id = 0;
  DeviceKind kind = DeviceKind::gate;
  double base_s = 0.0;
  double per_shot_s = 0.0;

  void validate() const {
    if (!(base_s >= 0.0) || !(per_shot_s >= 0.0)) throw std::invalid_argument("Device " + std::to_string(id) + ": negative service time");
  }
};

inline std::vector<Device> identical_devices(int n, DeviceKind kind = DeviceKind::gate) {
  std::vector<Device> out;
  for (int i = 0; i < n; ++i) out.push_back({i, kind, 0.0, 0.0});
  return out;
}

enum class JobKind { standalone, iterative, batch };

inline const char* to_string(JobKind k) {
  switch (k) {
    case JobKind::standalone: return "standalone";
    case JobKind::iterative: return "iterative";
    case JobKind::batch: return "batch";
  }
  return "?";
}

struct Job {
  int id = 0;
  double arrival_s = 0.0;
  JobKind kind = JobKind::standalone;
  int iterations = 1;        // iterative: quantum/classical rounds
  double quantum_s = 0.0;    // standalone and iterative: per quantum segment
  double classical_s = 0.0;  // iterative: per classical segment
  double rtt_s = 0.0;        // iterative: network round trip per iteration
  std::vector<double> instances;  // batch: quantum seconds per instance
  int shots = 0;
  DeviceKind target = DeviceKind::gate;
  std::optional<int> device;  // required device; a soft preference under preference-aware dispatch

  bool operator==(const Job&) const = default;

  int batch_size() const { return kind == JobKind::batch ? static_cast<int>(instances.size()) : 1; }

  void validate() const {
    const std::string who = "job " + std::to_string(id) + ": ";
    if (!(arrival_s >= 0.0) || !(quantum_s >= 0.0) || !(classical_s >= 0.0) || !(rtt_s >= 0.0) || shots < 0) {
      throw std::invalid_argument(who + "times must be >= 0");
    }
    if (iterations < 1) throw std::invalid_argument(who + "iterations must be >= 1");
    switch (kind) {
      case JobKind::standalone:
        if (iterations != 1 || !instances.empty()) throw std::invalid_argument(who + "standalone jobs run one quantum segment");
        break;
      case JobKind::iterative:
        if (!instances.empty()) throw std::invalid_argument(who + "iterative jobs carry no batch instances");
        break;
      case JobKind::batch:
        if (iterations != 1) throw std::invalid_argument(who + "batch jobs take iterations = 1");
        if (instances.empty()) throw std::invalid_argument(who + "batch needs at least one instance");
        for (double t : instances) {
          if (!(t >= 0.0)) throw std::invalid_argument(who + "instance times must be >= 0");
        }
        break;
    }
  }
};

inline Job standalone_job(int id, double arrival, double quantum) {
  Job j;
  j.id = id;
  j.arrival_s = arrival;
  j.quantum_s = quantum;
  return j;
}

inline Job iterative_job(int id, double arrival, int iterations, double quantum, double classical, double rtt) {
  Job j;
  j.id = id;
  j.arrival_s = arrival;
  j.kind = JobKind::iterative;
  j.iterations = iterations;
  j.quantum_s = quantum;
  j.classical_s = classical;
  j.rtt_s = rtt;
  return j;
}

inline Job batch_job(int id, double arrival, std::vector<double> instances) {
  Job j;
  j.id = id;
  j.arrival_s = arrival;
  j.kind = JobKind::batch;
  j.instances = std::move(instances);
  return j;
}

enum class Frontend {
  pinned,        // status quo: each job bound to one device queue at submission
  least_loaded,  // shared front-end queue; a free device takes the next job
  preference,    // as least_loaded, but a job's preferred device wins when free
};

inline const char* to_string(Frontend f) {
  switch (f) {
    case Frontend::pinned: return "pinned";
    case Frontend::least_loaded: return "least-loaded";
    case Frontend::preference: return "preference";
  }
  return "?";
}

inline Frontend parse_frontend(const std::string& s) {
  if (s == "pinned") return Frontend::pinned;
  if (s == "least-loaded") return Frontend::least_loaded;
  if (s == "preference") return Frontend::preference;
  throw std::invalid_argument("unknown policy '" + s + "' (pinned, least-loaded, preference)");
}

struct Policy {
  Frontend frontend = Frontend::pinned;
  double queue_overhead_s = 0.0;  // added to every quantum submission
  bool cloudlet = false;          // classical halves run next to the device
  double local_latency_s = 0.0;   // replaces rtt when cloudlets are on
  double jitter = 0.0;            // service times scaled by 1 + jitter * U(-1, 1)

  void validate() const {
    if (!(queue_overhead_s >= 0.0)) throw std::invalid_argument("Policy: queue overhead must be >= 0");
    if (!(local_latency_s >= 0.0)) throw std::invalid_argument("Policy: local latency must be >= 0");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw std::invalid_argument("Policy: jitter must lie in [0, 1)");
  }
};

enum class EventKind { arrive, queue, start, finish, classical_start, classical_end, complete };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::arrive: return "arrive";
    case EventKind::queue: return "queue";
    case EventKind::start: return "start";
    case EventKind::finish: return "finish";
    case EventKind::classical_start: return "classical_start";
    case EventKind::classical_end: return "classical_end";
    case EventKind::complete: return "complete";
  }
  return "?";
}

/// One log line. instance/iteration are -1 and device -1 when not applicable;
/// a queue event with device -1 means the shared front-end queue.
struct Event {
  double time = 0.0;
  int job = 0;
  int instance = -1;
  int iteration = -1;
  EventKind kind = EventKind::arrive;
  int device = -1;

  bool operator==(const Event&) const = default;
};

struct JobMetrics {
  int id = 0;
  double arrival_s = 0.0;
  double first_start_s = 0.0;
  double completion_s = 0.0;
  double wait_s = 0.0;  // summed queueing delay over all quantum segments
  double turnaround_s() const { return completion_s - arrival_s; }
};

struct DeviceMetrics {
  int id = 0;
  double busy_s = 0.0;
  int segments = 0;
  double utilization = 0.0;
};

struct Metrics {
  std::vector<JobMetrics> jobs;  // workload order
  std::vector<DeviceMetrics> devices;
  double start_s = 0.0;  // earliest arrival
  double end_s = 0.0;    // last completion
  double makespan_s() const { return end_s - start_s; }
};

struct SimResult {
  Metrics metrics;
  std::vector<Event> log;
};

/// Seconds an iterative job saves when its classical half runs on a cloudlet.
inline double cloudlet_benefit(const Job& job, double rtt, double local_latency) {
  if (job.kind != JobKind::iterative) throw std::invalid_argument("cloudlet_benefit: job " + std::to_string(job.id) + " is not iterative");
  if (!(local_latency >= 0.0) || !(local_latency <= rtt)) throw std::invalid_argument("cloudlet_benefit: need 0 <= local latency <= rtt");
  return job.iterations * (rtt - local_latency);
}

namespace detail {

struct Request {
  int job = 0;  // workload index
  int instance = -1;
  int iteration = -1;
  double quantum_s = 0.0;
  double ready_s = 0.0;
};

class Simulator {
 public:
  Simulator(const std::vector<Job>& jobs, const std::vector<Device>& devices, const Policy& policy, std::uint64_t seed)
      : jobs_(jobs), devices_(devices), policy_(policy), rng_(seed, 0xC10D) {
    policy_.validate();
    if (devices_.empty()) throw std::invalid_argument("simulate: no devices");
    std::map<int, int> dev_ids, job_ids;
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      devices_[d].validate();
      if (!dev_ids.emplace(devices_[d].id, static_cast<int>(d)).second) throw std::invalid_argument("simulate: duplicate device id " + std::to_string(devices_[d].id));
    }
    for (const auto& j : jobs_) {
      j.validate();
      if (!job_ids.emplace(j.id, 0).second) throw std::invalid_argument("simulate: duplicate job id " + std::to_string(j.id));
      if (j.device) {
        const auto it = dev_ids.find(*j.device);
        if (it == dev_ids.end()) throw std::invalid_argument("simulate: job " + std::to_string(j.id) + " needs device " + std::to_string(*j.device) + ", which is absent");
        if (devices_[static_cast<std::size_t>(it->second)].kind != j.target) {
          throw std::invalid_argument("simulate: job " + std::to_string(j.id) + " needs a " + to_string(j.target) + " device but device " +
                                      std::to_string(*j.device) + " is " + to_string(devices_[static_cast<std::size_t>(it->second)].kind));
        }
      } else if (std::none_of(devices_.begin(), devices_.end(), [&](const Device& d) { return d.kind == j.target; })) {
        throw std::invalid_argument("simulate: no " + std::string(to_string(j.target)) + " device for job " + std::to_string(j.id));
      }
      if (policy_.cloudlet && j.kind == JobKind::iterative && policy_.local_latency_s > j.rtt_s) {
        throw std::invalid_argument("simulate: cloudlet latency exceeds the rtt of job " + std::to_string(j.id));
      }
    }
    dev_index_ = std::move(dev_ids);
    busy_.assign(devices_.size(), false);
    local_.resize(devices_.size());
    dm_.resize(devices_.size());
    for (std::size_t d = 0; d < devices_.size(); ++d) dm_[d].id = devices_[d].id;
    jm_.resize(jobs_.size());
    remaining_.assign(jobs_.size(), 0);
    started_.assign(jobs_.size(), false);
  }

  SimResult run() {
    for (std::size_t i = 0; i < jobs_.size(); ++i) push(jobs_[i].arrival_s, Kind::arrival, static_cast<int>(i), {});
    while (!heap_.empty()) {
      const Pending e = heap_.top();
      heap_.pop();
      now_ = e.time;
      handle(e);
      dispatch();
    }
    SimResult out;
    out.log = std::move(log_);
    Metrics& m = out.metrics;
    m.jobs = jm_;
    if (!jobs_.empty()) {
      m.start_s = jobs_.front().arrival_s;
      m.end_s = m.start_s;
      for (const auto& j : m.jobs) {
        m.start_s = std::min(m.start_s, j.arrival_s);
        m.end_s = std::max(m.end_s, j.completion_s);
      }
    }
    m.devices = dm_;
    for (auto& d : m.devices) d.utilization = m.makespan_s() > 0.0 ? std::min(1.0, d.busy_s / m.makespan_s()) : 0.0;
    return out;
  }

 private:
  enum class Kind { arrival, device_done, results_back, classical_done };

  struct Pending {
    double time;
    std::uint64_t seq;
    Kind kind;
    int index;  // device for device_done, job otherwise
    Request req;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const { return a.time != b.time ? a.time > b.time : a.seq > b.seq; }
  };

  void push(double t, Kind k, int index, Request r) { heap_.push({t, seq_++, k, index, r}); }
  void log(int job, int inst, int iter, EventKind k, int device) { log_.push_back({now_, jobs_[static_cast<std::size_t>(job)].id, inst, iter, k, device}); }

  void handle(const Pending& e) {
    switch (e.kind) {
      case Kind::arrival: {
        const Job& j = jobs_[static_cast<std::size_t>(e.index)];
        jm_[static_cast<std::size_t>(e.index)].id = j.id;
        jm_[static_cast<std::size_t>(e.index)].arrival_s = j.arrival_s;
        log(e.index, -1, -1, EventKind::arrive, -1);
        if (j.kind == JobKind::batch) {
          remaining_[static_cast<std::size_t>(e.index)] = j.batch_size();
          for (int i = 0; i < j.batch_size(); ++i) submit({e.index, i, -1, j.instances[static_cast<std::size_t>(i)], now_});
        } else {
          remaining_[static_cast<std::size_t>(e.index)] = 1;
          submit({e.index, -1, j.kind == JobKind::iterative ? 0 : -1, j.quantum_s, now_});
        }
        break;
      }
      case Kind::device_done: {
        const auto d = static_cast<std::size_t>(e.index);
        const Request r = e.req;
        log(r.job, r.instance, r.iteration, EventKind::finish, devices_[d].id);
        busy_[d] = false;
        const Job& j = jobs_[static_cast<std::size_t>(r.job)];
        if (j.kind == JobKind::iterative) {
          const double latency = policy_.cloudlet ? policy_.local_latency_s : j.rtt_s;
          push(now_ + latency, Kind::results_back, r.job, r);
        } else if (--remaining_[static_cast<std::size_t>(r.job)] == 0) {
          complete(r.job);
        }
        break;
      }
      case Kind::results_back: {
        log(e.index, -1, e.req.iteration, EventKind::classical_start, -1);
        push(now_ + jobs_[static_cast<std::size_t>(e.index)].classical_s, Kind::classical_done, e.index, e.req);
        break;
      }
      case Kind::classical_done: {
        const Job& j = jobs_[static_cast<std::size_t>(e.index)];
        const int it = e.req.iteration;
        log(e.index, -1, it, EventKind::classical_end, -1);
        if (it + 1 < j.iterations) {
          submit({e.index, -1, it + 1, j.quantum_s, now_});
        } else {
          complete(e.index);
        }
        break;
      }
    }
  }

  void complete(int job) {
    jm_[static_cast<std::size_t>(job)].completion_s = now_;
    log(job, -1, -1, EventKind::complete, -1);
  }

  int default_device(const Job& j) const {
    if (j.device) return dev_index_.at(*j.device);
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      if (devices_[d].kind == j.target) return static_cast<int>(d);
    }
    return -1;  // unreachable after validation
  }

  void submit(const Request& r) {
    if (policy_.frontend == Frontend::pinned) {
      const int d = default_device(jobs_[static_cast<std::size_t>(r.job)]);
      local_[static_cast<std::size_t>(d)].push_back(r);
      log(r.job, r.instance, r.iteration, EventKind::queue, devices_[static_cast<std::size_t>(d)].id);
    } else {
      front_.push_back(r);
      log(r.job, r.instance, r.iteration, EventKind::queue, -1);
    }
  }

  bool eligible(const Job& j, std::size_t d) const {
    if (busy_[d] || devices_[d].kind != j.target) return false;
    if (j.device && policy_.frontend != Frontend::preference) return devices_[d].id == *j.device;
    return true;
  }

  int pick(const Job& j) const {
    if (policy_.frontend == Frontend::preference && j.device) {
      const auto d = static_cast<std::size_t>(dev_index_.at(*j.device));
      if (eligible(j, d)) return static_cast<int>(d);
    }
    int best = -1;
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      if (!eligible(j, d)) continue;
      if (best < 0 || dm_[d].busy_s < dm_[static_cast<std::size_t>(best)].busy_s) best = static_cast<int>(d);
    }
    return best;
  }

  void start(std::size_t d, const Request& r) {
    const Job& j = jobs_[static_cast<std::size_t>(r.job)];
    double service = policy_.queue_overhead_s + devices_[d].base_s + r.quantum_s + j.shots * devices_[d].per_shot_s;
    if (policy_.jitter > 0.0) service *= 1.0 + policy_.jitter * rng_.uniform(-1.0, 1.0);
    busy_[d] = true;
    dm_[d].busy_s += service;
    ++dm_[d].segments;
    auto& jm = jm_[static_cast<std::size_t>(r.job)];
    if (!started_[static_cast<std::size_t>(r.job)]) {
      jm.first_start_s = now_;
      started_[static_cast<std::size_t>(r.job)] = true;
    }
    jm.wait_s += now_ - r.ready_s;
    log(r.job, r.instance, r.iteration, EventKind::start, devices_[d].id);
    push(now_ + service, Kind::device_done, static_cast<int>(d), r);
  }

  void dispatch() {
    if (policy_.frontend == Frontend::pinned) {
      for (std::size_t d = 0; d < devices_.size(); ++d) {
        if (busy_[d] || local_[d].empty()) continue;
        const Request r = local_[d].front();
        local_[d].pop_front();
        start(d, r);
      }
      return;
    }
    // Late binding: scan the shared queue in order and hand each request to
    // a free eligible device, so no device idles while work it can run waits.
    for (auto it = front_.begin(); it != front_.end();) {
      const int d = pick(jobs_[static_cast<std::size_t>(it->job)]);
      if (d < 0) {
        ++it;
        continue;
      }
      const Request r = *it;
      it = front_.erase(it);
      start(static_cast<std::size_t>(d), r);
    }
  }

  std::vector<Job> jobs_;
  std::vector<Device> devices_;
  Policy policy_;
  Rng rng_;
  std::map<int, int> dev_index_;
  std::priority_queue<Pending, std::vector<Pending>, Later> heap_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::vector<bool> busy_;
  std::vector<std::deque<Request>> local_;
  std::deque<Request> front_;
  std::vector<DeviceMetrics> dm_;
  std::vector<JobMetrics> jm_;
  std::vector<int> remaining_;
  std::vector<bool> started_;
  std::vector<Event> log_;
};

}  // namespace detail

/// Event-driven run of `workload` on `devices`. Ties in time resolve in the
/// order events were scheduled, so equal inputs give equal logs.
inline SimResult simulate(const std::vector<Job>& workload, const std::vector<Device>& devices, const Policy& policy, std::uint64_t seed = 0) {
  return detail::Simulator(workload, devices, policy, seed).run();
}

}  // namespace quatro::cloudsim
