#include "vecoff/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace vecoff {

ConcurrentSet concurrent_set(std::span<const ReadyTask> ready, double t) {
  ConcurrentSet set;
  set.offload_time = t;
  for (const auto& r : ready) {
    if (std::abs(r.ready_time - t) < kSimultaneityTolerance) {
      set.task_ids.push_back(r.id);
      set.sizes.push_back(r.size);
    }
  }
  return set;
}

std::vector<ConcurrentSet> group_concurrent(std::span<const ReadyTask> ready) {
  std::vector<ReadyTask> sorted(ready.begin(), ready.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const ReadyTask& a, const ReadyTask& b) {
    return a.ready_time != b.ready_time ? a.ready_time < b.ready_time : a.id < b.id;
  });
  std::vector<ConcurrentSet> sets;
  double prev = 0.0;
  for (const auto& r : sorted) {
    if (sets.empty() || r.ready_time - prev >= kSimultaneityTolerance) {
      sets.push_back(ConcurrentSet{r.ready_time, {}, {}});
    }
    sets.back().task_ids.push_back(r.id);
    sets.back().sizes.push_back(r.size);
    prev = r.ready_time;
  }
  return sets;
}

std::vector<double> allocate_bandwidth(const ConcurrentSet& set, double b_max) {
  if (set.count() == 0) throw std::invalid_argument("cannot allocate bandwidth to an empty set");
  if (set.count() == 1) return {b_max};
  double total = 0.0;
  for (double s : set.sizes) {
    if (!(s > 0.0)) throw std::invalid_argument("task sizes must be > 0");
    total += s;
  }
  std::vector<double> out;
  out.reserve(set.count());
  for (double s : set.sizes) out.push_back(b_max * (s / total));
  return out;
}

double rate(double bandwidth, const ChannelParams& ch) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  const double snr = ch.tx_power * ch.channel_gain / ch.noise_density;
  if (!(snr > 0.0) || !std::isfinite(snr)) throw std::invalid_argument("SNR must be positive and finite");
  return bandwidth * std::log2(1.0 + snr);
}

double comm_time(double size_bits, double rate_bps) {
  if (!(rate_bps > 0.0)) throw std::invalid_argument("rate must be > 0");
  return size_bits / rate_bps;
}

CommPlan assign_comm_times(std::span<Task> tasks, const ChannelParams& ch) {
  std::vector<ReadyTask> ready;
  ready.reserve(tasks.size());
  std::unordered_map<std::int64_t, Task*> by_id;
  for (auto& t : tasks) {
    ready.push_back({t.id, t.size, t.arrival});
    by_id[t.id] = &t;
  }
  CommPlan plan;
  plan.sets = group_concurrent(ready);
  for (const auto& set : plan.sets) {
    auto alloc = allocate_bandwidth(set, ch.bandwidth_max);
    for (std::size_t k = 0; k < set.count(); ++k) {
      by_id.at(set.task_ids[k])->comm_time = comm_time(set.sizes[k], rate(alloc[k], ch));
    }
    plan.allocations.push_back(std::move(alloc));
  }
  return plan;
}

}  // namespace vecoff
