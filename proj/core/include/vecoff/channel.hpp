#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vecoff/domain.hpp"

namespace vecoff {

/// Tasks that become ready for transmission at the same instant and therefore
/// share the uplink bandwidth.
struct ConcurrentSet {
  double offload_time = 0.0;
  std::vector<std::int64_t> task_ids;
  std::vector<double> sizes;  // bits, parallel to task_ids

  [[nodiscard]] std::size_t count() const { return task_ids.size(); }
};

struct ReadyTask {
  std::int64_t id = 0;
  double size = 0.0;
  double ready_time = 0.0;
};

/// Members of `ready` whose ready_time is within kSimultaneityTolerance of `t`.
ConcurrentSet concurrent_set(std::span<const ReadyTask> ready, double t);

/// Partitions ready tasks into concurrent sets. Input order does not matter;
/// chains closer than the tolerance collapse into one set anchored at its first instant.
std::vector<ConcurrentSet> group_concurrent(std::span<const ReadyTask> ready);

/// Size-proportional split of b_max; a singleton set receives all of it.
std::vector<double> allocate_bandwidth(const ConcurrentSet& set, double b_max);

/// Shannon rate b * log2(1 + p g / n0), bits per second.
double rate(double bandwidth, const ChannelParams& ch);

/// One-way transfer time in seconds.
double comm_time(double size_bits, double rate_bps);

struct CommPlan {
  std::vector<ConcurrentSet> sets;
  std::vector<std::vector<double>> allocations;  // parallel to sets
};

/// Fills Task::comm_time for every task from its uplink concurrent set (tasks
/// ready at the same arrival instant share bandwidth). Returns the sets formed.
CommPlan assign_comm_times(std::span<Task> tasks, const ChannelParams& ch);

}  // namespace vecoff
