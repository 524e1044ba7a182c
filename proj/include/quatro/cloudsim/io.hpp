#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quatro/cloudsim/sim.hpp"

namespace quatro::cloudsim {

inline constexpr const char* kWorkloadHeader = "job_id,arrival_s,kind,iterations,quantum_s,classical_s,rtt_s,batch_size";

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

inline double parse_time(const std::string& field, const char* name) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw std::invalid_argument(std::string(name) + " '" + t + "' is not a number");
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " must be >= 0, got " + t);
  return v;
}

inline int parse_count(const std::string& field, const char* name) {
  const std::string t = trim(field);
  int v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw std::invalid_argument(std::string(name) + " '" + t + "' is not an integer");
  return v;
}

inline std::string format_time(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parses a workload CSV. Batch rows give quantum_s either once for every
/// instance or as batch_size values joined by ';'. Blank lines are skipped;
/// errors carry the 1-based line number.
inline std::vector<Job> read_workload_csv(std::istream& is) {
  std::vector<Job> out;
  std::set<int> ids;
  std::string line;
  bool header = false;
  for (int n = 1; std::getline(is, line); ++n) {
    if (detail::trim(line).empty()) continue;
    try {
      if (!header) {
        if (detail::trim(line) != kWorkloadHeader) throw std::invalid_argument(std::string("expected header '") + kWorkloadHeader + "'");
        header = true;
        continue;
      }
      const auto f = detail::split(line, ',');
      if (f.size() != 8) throw std::invalid_argument("expected 8 fields, got " + std::to_string(f.size()));
      Job j;
      j.id = detail::parse_count(f[0], "job_id");
      j.arrival_s = detail::parse_time(f[1], "arrival_s");
      const std::string kind = detail::trim(f[2]);
      if (kind == "standalone") {
        j.kind = JobKind::standalone;
      } else if (kind == "iterative") {
        j.kind = JobKind::iterative;
      } else if (kind == "batch") {
        j.kind = JobKind::batch;
      } else {
        throw std::invalid_argument("unknown kind '" + kind + "'");
      }
      j.iterations = detail::parse_count(f[3], "iterations");
      j.classical_s = detail::parse_time(f[5], "classical_s");
      j.rtt_s = detail::parse_time(f[6], "rtt_s");
      const int batch = detail::parse_count(f[7], "batch_size");
      if (batch < 1) throw std::invalid_argument("batch_size must be >= 1");
      if (j.kind == JobKind::batch) {
        const auto parts = detail::split(f[4], ';');
        if (parts.size() == 1) {
          j.instances.assign(static_cast<std::size_t>(batch), detail::parse_time(parts[0], "quantum_s"));
        } else if (static_cast<int>(parts.size()) == batch) {
          for (const auto& p : parts) j.instances.push_back(detail::parse_time(p, "quantum_s"));
        } else {
          throw std::invalid_argument("quantum_s lists " + std::to_string(parts.size()) + " times for batch_size " + std::to_string(batch));
        }
      } else {
        if (batch != 1) throw std::invalid_argument("batch_size must be 1 for " + kind + " jobs");
        j.quantum_s = detail::parse_time(f[4], "quantum_s");
      }
      j.validate();
      if (!ids.insert(j.id).second) throw std::invalid_argument("duplicate job_id " + std::to_string(j.id));
      out.push_back(std::move(j));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("workload line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Job> ingest_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open workload '" + path + "'");
  return read_workload_csv(in);
}

/// Writes only what the CSV can carry: shots, target and device stay at defaults on re-read.
inline void write_workload_csv(std::ostream& os, const std::vector<Job>& jobs) {
  os << kWorkloadHeader << '\n';
  for (const auto& j : jobs) {
    std::string q;
    if (j.kind == JobKind::batch) {
      const bool same = std::all_of(j.instances.begin(), j.instances.end(), [&](double t) { return t == j.instances.front(); });
      for (std::size_t i = 0; i < (same ? 1 : j.instances.size()); ++i) q += (i ? ";" : "") + detail::format_time(j.instances[i]);
    } else {
      q = detail::format_time(j.quantum_s);
    }
    os << j.id << ',' << detail::format_time(j.arrival_s) << ',' << to_string(j.kind) << ',' << j.iterations << ',' << q << ','
       << detail::format_time(j.classical_s) << ',' << detail::format_time(j.rtt_s) << ',' << j.batch_size() << '\n';
  }
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json jobs = nlohmann::json::array(), devices = nlohmann::json::array();
  for (const auto& j : m.jobs) {
    jobs.push_back({{"id", j.id},
                    {"arrival_s", j.arrival_s},
                    {"first_start_s", j.first_start_s},
                    {"completion_s", j.completion_s},
                    {"wait_s", j.wait_s},
                    {"turnaround_s", j.turnaround_s()}});
  }
  for (const auto& d : m.devices) {
    devices.push_back({{"id", d.id}, {"busy_s", d.busy_s}, {"segments", d.segments}, {"utilization", d.utilization}});
  }
  return {{"start_s", m.start_s}, {"end_s", m.end_s}, {"makespan_s", m.makespan_s()}, {"jobs", jobs}, {"devices", devices}};
}

inline void write_event_log_csv(std::ostream& os, const std::vector<Event>& log) {
  os << "time_s,job_id,instance,iteration,event,device\n";
  for (const auto& e : log) {
    os << detail::format_time(e.time) << ',' << e.job << ',' << e.instance << ',' << e.iteration << ',' << to_string(e.kind) << ','
       << e.device << '\n';
  }
}

}  // namespace quatro::cloudsim
