#pragma once

// Independent recomputations used as test oracles. Nothing here calls into the
// library code it is meant to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vecoff/domain.hpp"
#include "vecoff/engine.hpp"

namespace oracle {

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

struct Latency {
  double start = 0.0;
  double waiting = 0.0;
  double comp = 0.0;
  double comm = 0.0;
  double e2e = 0.0;
};

/// A single task on a server free at `avail`, sharing the uplink with tasks of
/// `others` sizes that became ready at the same instant.
inline Latency single_task(double arrival, double proc, double size, double avail,
                           const std::vector<double>& others, double b_max, double p, double g, double n0) {
  double total = size;
  for (double s : others) total += s;
  const double bw = others.empty() ? b_max : b_max * size / total;
  const double r = bw * std::log2(1.0 + p * g / n0);
  Latency l;
  l.start = std::max(avail, arrival);
  l.waiting = l.start - arrival;
  l.comp = proc + l.waiting;
  l.comm = size / r;
  l.e2e = l.comp + 2.0 * l.comm;
  return l;
}

struct Reward {
  double r_drop = 0.0;
  double r_latency = 0.0;
};

inline Reward reward(const std::vector<double>& gaps, const std::vector<double>& procs, std::size_t chosen) {
  if (gaps.size() <= 1) return {};
  double g_sum = 0.0;
  double p_sum = 0.0;
  for (double g : gaps) g_sum += g;
  for (double p : procs) p_sum += p;
  if (g_sum <= 0.0 || p_sum <= 0.0) return {};
  return {100.0 / g_sum * (g_sum - gaps[chosen]), 100.0 / p_sum * (p_sum - procs[chosen])};
}

/// Every invariant a finished episode must satisfy; empty when all hold.
inline std::vector<std::string> episode_violations(const vecoff::EpisodeResult& r) {
  using vecoff::TaskStatus;
  std::vector<std::string> bad;
  std::size_t completed = 0;
  std::size_t dropped = 0;
  std::vector<std::vector<std::pair<double, double>>> busy(r.mecs.size());
  for (const auto& t : r.tasks) {
    const std::string tag = "task " + std::to_string(t.id) + ": ";
    if (t.status == TaskStatus::Pending || t.status == TaskStatus::Assigned) bad.push_back(tag + "not finished");
    if (t.status == TaskStatus::Dropped) {
      ++dropped;
      if (t.assigned_mec) bad.push_back(tag + "dropped but assigned");
      continue;
    }
    ++completed;
    if (!t.assigned_mec || !t.start_proc || !t.waiting || !t.comm_time || !t.comp_latency || !t.e2e_latency) {
      bad.push_back(tag + "completed with missing fields");
      continue;
    }
    if (*t.waiting < 0.0) bad.push_back(tag + "negative waiting");
    if (std::abs(*t.waiting - (*t.start_proc - t.arrival)) > 1e-9) bad.push_back(tag + "waiting mismatch");
    if (*t.comp_latency + 1e-12 < t.proc_time) bad.push_back(tag + "L^p < T^p");
    if (*t.e2e_latency + 1e-12 < *t.comp_latency) bad.push_back(tag + "L^e2e < L^p");
    const double ret = *t.start_proc + t.proc_time + *t.comm_time;
    if (ret > t.deadline + 1e-9) bad.push_back(tag + "completed after its deadline");
    if (*t.assigned_mec >= r.mecs.size()) {
      bad.push_back(tag + "server index out of range");
    } else {
      busy[*t.assigned_mec].emplace_back(*t.start_proc, *t.start_proc + t.proc_time);
    }
  }
  if (completed + dropped != r.tasks.size()) bad.emplace_back("completed + dropped != N");
  if (dropped != r.num_dropped) bad.emplace_back("num_dropped disagrees with task records");
  if (completed != r.num_completed) bad.emplace_back("num_completed disagrees with task records");
  for (std::size_t j = 0; j < busy.size(); ++j) {
    auto& iv = busy[j];
    std::sort(iv.begin(), iv.end());
    for (std::size_t k = 1; k < iv.size(); ++k) {
      if (iv[k].first < iv[k - 1].second - 1e-9) bad.push_back("server " + std::to_string(j) + " overlaps");
    }
    if (iv.size() != r.mecs[j].busy_intervals.size()) {
      bad.push_back("server " + std::to_string(j) + " interval count disagrees with tasks");
    }
  }
  return bad;
}

/// Random small task set, sorted by arrival, ids in arrival order.
inline std::vector<vecoff::Task> random_tasks(std::mt19937_64& rng, std::size_t n, double horizon = 3.0) {
  std::uniform_real_distribution<double> arrival(0.0, horizon);
  std::uniform_real_distribution<double> proc(0.05, 1.0);
  std::uniform_real_distribution<double> range(0.3, 6.0);
  std::uniform_real_distribution<double> size(1e5, 2e7);
  std::vector<vecoff::Task> tasks(n);
  for (auto& t : tasks) {
    t.arrival = arrival(rng);
    t.proc_time = proc(rng);
    t.remaining_in_range = range(rng);
    t.deadline = t.arrival + t.remaining_in_range;
    t.size = size(rng);
  }
  std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
  for (std::size_t i = 0; i < n; ++i) {
    tasks[i].id = static_cast<std::int64_t>(i);
    tasks[i].vehicle_id = static_cast<std::int64_t>(i);
  }
  return tasks;
}

}  // namespace oracle
