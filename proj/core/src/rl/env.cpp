#include "vecoff/rl/env.hpp"

#include <stdexcept>

#include "vecoff/rl/reward.hpp"
#include "vecoff/seeding.hpp"

namespace vecoff::rl {

ToyEnvironment::ToyEnvironment(std::size_t steps_per_episode, double dominant_reward)
    : steps_(steps_per_episode), dominant_(dominant_reward) {}

EpisodeSummary ToyEnvironment::play(DecisionMaker& maker, std::uint64_t episode_seed) {
  std::mt19937_64 rng(episode_seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  EpisodeSummary summary;
  Observation obs;
  obs.mask = {true, true};
  for (std::size_t k = 0; k < steps_; ++k) {
    obs.state.assign(state_size(contract_), 0.0);
    for (auto& v : obs.state) v = noise(rng);
    const auto action = maker.decide(obs);
    if (action >= obs.mask.size()) throw std::out_of_range("toy action out of range");
    const double r = action == 0 ? dominant_ : 0.0;
    maker.feedback(r);
    summary.total_reward += r;
    ++summary.decisions;
  }
  return summary;
}

AgentScheduler::AgentScheduler(DecisionMaker& maker, EncoderContract contract, std::string label)
    : maker_(maker), contract_(contract), label_(std::move(label)) {}

std::size_t AgentScheduler::select(const DecisionContext& ctx) {
  if (ctx.window.index == 0) summary_ = {};
  auto enc = encode_state(ctx.mecs, ctx.window, ctx.now, contract_);
  Observation obs{std::move(enc.state.values), std::move(enc.mask.valid)};
  const auto action = maker_.decide(obs);
  if (action >= obs.mask.size() || !obs.mask[action]) {
    throw std::out_of_range("agent chose masked action " + std::to_string(action));
  }
  const std::span<const Task> visible(ctx.window.feasible.data(), enc.visible);
  const auto r = reward(visible, action, ctx.window.earliest_avail);
  maker_.feedback(r.r_total);
  summary_.total_reward += r.r_total;
  ++summary_.decisions;
  return action;
}

SimulationEnvironment::SimulationEnvironment(SimulationEnvConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_.sim);
  validate_geometry(cfg_.geometry);
  validate_workload(cfg_.workload);
  if (cfg_.contract.num_mecs != cfg_.sim.num_mecs || cfg_.contract.window_cap != cfg_.sim.window_cap) {
    throw std::invalid_argument("encoder contract disagrees with the simulation config");
  }
  cfg_.sim.charge_exec_time = false;
}

EpisodeSummary SimulationEnvironment::play(DecisionMaker& maker, std::uint64_t episode_seed) {
  const auto trace = generate_trace(cfg_.geometry, cfg_.vehicles, derive_seed(episode_seed, 0));
  auto spawned = spawn_tasks(trace, cfg_.workload, cfg_.geometry, cfg_.sim.tasks_per_vehicle,
                             derive_seed(episode_seed, 1));
  AgentScheduler agent(maker, cfg_.contract);
  last_ = run_episode(std::move(spawned.tasks), agent, cfg_.sim, cfg_.channel);
  return agent.summary();
}

std::size_t GreedyMaker::decide(const Observation& obs) {
  const auto a = select(policy_, obs.state, obs.mask).action;
  actions_.push_back(a);
  return a;
}

double evaluate_policy(Environment& env, const Policy& policy, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) return 0.0;
  double total = 0.0;
  for (auto s : seeds) {
    GreedyMaker maker(policy);
    total += env.play(maker, s).total_reward;
  }
  return total / static_cast<double>(seeds.size());
}

}  // namespace vecoff::rl
