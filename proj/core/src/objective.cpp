#include "vecoff/objective.hpp"

#include <algorithm>

namespace vecoff {

namespace {

double served_latency_sum(const EpisodeResult& result) {
  double sum = 0.0;
  for (const auto& t : result.tasks) {
    if (t.assigned_mec && t.e2e_latency) sum += *t.e2e_latency;
  }
  return sum;
}

}  // namespace

double objective(double latency_sum, std::size_t dropped, std::size_t total, double lambda) {
  const double drop_ratio = total ? static_cast<double>(dropped) / static_cast<double>(total) : 0.0;
  return lambda * latency_sum + (1.0 - lambda) * drop_ratio;
}

double objective(const EpisodeResult& result, double lambda) {
  return objective(served_latency_sum(result), result.num_dropped, result.num_tasks(), lambda);
}

double objective_normalized(const EpisodeResult& result, double lambda) {
  const auto n = result.num_tasks();
  if (n == 0) return 0.0;
  double budget = 0.0;
  for (const auto& t : result.tasks) budget = std::max(budget, t.remaining_in_range);
  const double latency = budget > 0.0 ? served_latency_sum(result) / (static_cast<double>(n) * budget) : 0.0;
  return lambda * latency + (1.0 - lambda) * static_cast<double>(result.num_dropped) / static_cast<double>(n);
}

}  // namespace vecoff
