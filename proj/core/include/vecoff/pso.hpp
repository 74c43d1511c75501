#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/engine.hpp"

namespace vecoff {

struct PsoParams {
  std::size_t swarm_size = 50;
  std::size_t iterations_static = 1000;
  std::size_t iterations_dynamic = 30;
  double inertia = 0.729;
  double c1 = 1.49;
  double c2 = 1.49;
  double velocity_clamp = 1.0;
  bool operator==(const PsoParams&) const = default;
};

void validate_pso(const PsoParams& p);

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_score = 0.0;
};

/// A processing order over task indices and the objective its replay yields.
struct AssignmentPlan {
  std::vector<std::size_t> ordering;
  double objective = 0.0;
};

/// Random-key decoding: indices sorted by ascending key, ties to the lower index.
std::vector<std::size_t> decode_priorities(std::span<const double> keys);

struct SwarmResult {
  std::vector<double> best_position;
  double best_score = 0.0;
  std::size_t evaluations = 0;
};

/// Global-best PSO over continuous priority vectors of length `dim`.
/// Particle 0 starts on the identity ordering; the rest start uniformly in [0, 1).
SwarmResult run_swarm(std::size_t dim, std::size_t iterations, const PsoParams& params,
                      std::mt19937_64& rng,
                      const std::function<double(std::span<const double>)>& fitness);

/// Offline planner over the whole task list (sorted by arrival). Fitness is the
/// objective of replaying the decoded order on idle servers.
AssignmentPlan pso_optimize_static(std::vector<Task> tasks, const SimConfig& cfg,
                                   const ChannelParams& channel, const PsoParams& params,
                                   std::uint64_t seed);

struct DynamicChoice {
  std::size_t index = 0;
  double best_fitness = 0.0;
  std::vector<std::size_t> ordering;
};

/// Optimizes the ordering of the window's feasible tasks against the current
/// server availability and returns the head of the best ordering.
DynamicChoice pso_select_dynamic(const DecisionWindow& window, std::span<const MecState> mecs,
                                 const SimConfig& cfg, const PsoParams& params,
                                 std::mt19937_64& rng);

class DynamicPsoScheduler final : public Scheduler {
 public:
  DynamicPsoScheduler(PsoParams params, std::uint64_t seed) : params_(params), rng_(seed) {}
  [[nodiscard]] std::string name() const override { return "on-dyn-pso"; }
  std::size_t select(const DecisionContext& ctx) override;
  /// Best window-level fitness seen in each invocation of the current episode.
  [[nodiscard]] const std::vector<double>& window_fitness() const { return window_fitness_; }

 private:
  PsoParams params_;
  std::mt19937_64 rng_;
  std::vector<double> window_fitness_;
};

/// Exhaustive search over every ordering (N <= 8).
AssignmentPlan brute_force_oracle(std::vector<Task> tasks, const SimConfig& cfg,
                                  const ChannelParams& channel);

void to_json(nlohmann::json& j, const PsoParams& p);
void from_json(const nlohmann::json& j, PsoParams& p);

}  // namespace vecoff
