#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vecoff/domain.hpp"

namespace vecoff::rl {

struct RewardBreakdown {
  std::vector<double> gaps;  // deadline - earliest availability, per candidate
  double gap_total = 0.0;
  double proc_total = 0.0;
  double r_drop = 0.0;
  double r_latency = 0.0;
  double r_total = 0.0;
};

/// Reward for picking candidates[chosen] at a decision instant t_e_av.
///   r_drop    = 100 / G * (G - gap[chosen]),   G = sum of gaps
///   r_latency = 100 / P * (P - proc[chosen]),  P = sum of processing times
/// A single candidate, or a non-positive G or P, yields an all-zero reward.
RewardBreakdown reward(std::span<const Task> candidates, std::size_t chosen, double t_e_av);

}  // namespace vecoff::rl
