#include "vecoff/rl/reward.hpp"

#include <stdexcept>

namespace vecoff::rl {

RewardBreakdown reward(std::span<const Task> candidates, std::size_t chosen, double t_e_av) {
  if (chosen >= candidates.size()) throw std::out_of_range("chosen task is not in the window");
  RewardBreakdown r;
  r.gaps.reserve(candidates.size());
  for (const auto& t : candidates) {
    r.gaps.push_back(t.deadline - t_e_av);
    r.gap_total += r.gaps.back();
    r.proc_total += t.proc_time;
  }
  if (candidates.size() == 1 || r.gap_total <= 0.0 || r.proc_total <= 0.0) return r;
  r.r_drop = 100.0 / r.gap_total * (r.gap_total - r.gaps[chosen]);
  r.r_latency = 100.0 / r.proc_total * (r.proc_total - candidates[chosen].proc_time);
  r.r_total = r.r_drop + r.r_latency;
  return r;
}

}  // namespace vecoff::rl
