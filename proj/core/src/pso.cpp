#include "vecoff/pso.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vecoff/objective.hpp"

namespace vecoff {

void validate_pso(const PsoParams& p) {
  std::vector<std::string> problems;
  if (p.swarm_size < 1) problems.emplace_back("swarm_size must be >= 1");
  if (p.velocity_clamp < 0.0) problems.emplace_back("velocity_clamp must be >= 0");
  if (p.c1 < 0.0) problems.emplace_back("c1 must be >= 0");
  if (p.c2 < 0.0) problems.emplace_back("c2 must be >= 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::vector<std::size_t> decode_priorities(std::span<const double> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

SwarmResult run_swarm(std::size_t dim, std::size_t iterations, const PsoParams& params,
                      std::mt19937_64& rng,
                      const std::function<double(std::span<const double>)>& fitness) {
  validate_pso(params);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> vel(-params.velocity_clamp, params.velocity_clamp);

  SwarmResult out;
  std::vector<Particle> swarm(params.swarm_size);
  out.best_score = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < swarm.size(); ++p) {
    auto& particle = swarm[p];
    particle.position.resize(dim);
    particle.velocity.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      particle.position[d] = p == 0 ? static_cast<double>(d) / static_cast<double>(std::max<std::size_t>(dim, 1))
                                    : unit(rng);
      particle.velocity[d] = vel(rng);
    }
    particle.best_position = particle.position;
    particle.best_score = fitness(particle.position);
    ++out.evaluations;
    if (particle.best_score < out.best_score) {
      out.best_score = particle.best_score;
      out.best_position = particle.best_position;
    }
  }

  for (std::size_t it = 0; it < iterations; ++it) {
    for (auto& particle : swarm) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double v = params.inertia * particle.velocity[d] +
                   params.c1 * r1 * (particle.best_position[d] - particle.position[d]) +
                   params.c2 * r2 * (out.best_position[d] - particle.position[d]);
        v = std::clamp(v, -params.velocity_clamp, params.velocity_clamp);
        particle.velocity[d] = v;
        particle.position[d] += v;
      }
      const double score = fitness(particle.position);
      ++out.evaluations;
      if (score < particle.best_score) {
        particle.best_score = score;
        particle.best_position = particle.position;
      }
    }
    // Global best refreshes after the whole swarm has moved.
    for (const auto& particle : swarm) {
      if (particle.best_score < out.best_score) {
        out.best_score = particle.best_score;
        out.best_position = particle.best_position;
      }
    }
  }
  return out;
}

AssignmentPlan pso_optimize_static(std::vector<Task> tasks, const SimConfig& cfg,
                                   const ChannelParams& channel, const PsoParams& params,
                                   std::uint64_t seed) {
  validate_config(cfg);
  assign_comm_times(tasks, channel);
  const std::size_t n = tasks.size();
  AssignmentPlan plan;
  if (n == 0) return plan;

  std::vector<double> availability(cfg.num_mecs);
  auto fitness = [&](std::span<const double> keys) {
    const auto order = decode_priorities(keys);
    std::fill(availability.begin(), availability.end(), 0.0);
    const auto stats = replay_stats(tasks, order, availability);
    return objective(stats.latency_sum, stats.dropped, n, cfg.lambda);
  };
  std::mt19937_64 rng(seed);
  const auto best = run_swarm(n, params.iterations_static, params, rng, fitness);
  plan.ordering = decode_priorities(best.best_position);
  plan.objective = best.best_score;
  return plan;
}

DynamicChoice pso_select_dynamic(const DecisionWindow& window, std::span<const MecState> mecs,
                                 const SimConfig& cfg, const PsoParams& params,
                                 std::mt19937_64& rng) {
  const auto& tasks = window.feasible;
  if (tasks.empty()) throw std::invalid_argument("cannot select from an empty window");
  const std::size_t n = tasks.size();

  std::vector<double> initial(mecs.size());
  for (std::size_t j = 0; j < mecs.size(); ++j) initial[j] = mecs[j].available_at;
  std::vector<double> availability(initial.size());
  auto fitness = [&](std::span<const double> keys) {
    const auto order = decode_priorities(keys);
    std::copy(initial.begin(), initial.end(), availability.begin());
    const auto stats = replay_stats(tasks, order, availability, window.earliest_avail);
    return objective(stats.latency_sum, stats.dropped, n, cfg.lambda);
  };

  DynamicChoice choice;
  if (n == 1) {
    choice.ordering = {0};
    const double key = 0.0;
    choice.best_fitness = fitness(std::span<const double>(&key, 1));
    return choice;
  }
  const auto best = run_swarm(n, params.iterations_dynamic, params, rng, fitness);
  choice.ordering = decode_priorities(best.best_position);
  choice.index = choice.ordering.front();
  choice.best_fitness = best.best_score;
  return choice;
}

std::size_t DynamicPsoScheduler::select(const DecisionContext& ctx) {
  if (ctx.window.index == 0) window_fitness_.clear();
  auto choice = pso_select_dynamic(ctx.window, ctx.mecs, ctx.cfg, params_, rng_);
  window_fitness_.push_back(choice.best_fitness);
  return choice.index;
}

AssignmentPlan brute_force_oracle(std::vector<Task> tasks, const SimConfig& cfg,
                                  const ChannelParams& channel) {
  validate_config(cfg);
  if (tasks.size() > 8) throw std::invalid_argument("brute-force oracle is limited to 8 tasks");
  assign_comm_times(tasks, channel);
  const std::size_t n = tasks.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> availability(cfg.num_mecs);

  AssignmentPlan best;
  best.objective = std::numeric_limits<double>::infinity();
  do {
    std::fill(availability.begin(), availability.end(), 0.0);
    const auto stats = replay_stats(tasks, order, availability);
    const double value = objective(stats.latency_sum, stats.dropped, n, cfg.lambda);
    if (value < best.objective) {
      best.objective = value;
      best.ordering = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  if (n == 0) best.objective = 0.0;
  return best;
}

void to_json(nlohmann::json& j, const PsoParams& p) {
  j = nlohmann::json{{"swarm_size", p.swarm_size},
                     {"iterations_static", p.iterations_static},
                     {"iterations_dynamic", p.iterations_dynamic},
                     {"inertia", p.inertia},
                     {"c1", p.c1},
                     {"c2", p.c2},
                     {"velocity_clamp", p.velocity_clamp}};
}

void from_json(const nlohmann::json& j, PsoParams& p) {
  const PsoParams d;
  p.swarm_size = j.value("swarm_size", d.swarm_size);
  p.iterations_static = j.value("iterations_static", d.iterations_static);
  p.iterations_dynamic = j.value("iterations_dynamic", d.iterations_dynamic);
  p.inertia = j.value("inertia", d.inertia);
  p.c1 = j.value("c1", d.c1);
  p.c2 = j.value("c2", d.c2);
  p.velocity_clamp = j.value("velocity_clamp", d.velocity_clamp);
}

}  // namespace vecoff
