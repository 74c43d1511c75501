#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vecoff/engine.hpp"
#include "vecoff/mobility.hpp"
#include "vecoff/rl/encoding.hpp"
#include "vecoff/rl/policy.hpp"

namespace vecoff::rl {

struct Observation {
  std::vector<double> state;
  std::vector<bool> mask;
};

/// The agent side of an episode: one decide() per decision, each followed by
/// exactly one feedback() carrying that decision's reward.
class DecisionMaker {
 public:
  virtual ~DecisionMaker() = default;
  virtual std::size_t decide(const Observation& obs) = 0;
  virtual void feedback(double reward) = 0;
};

struct EpisodeSummary {
  double total_reward = 0.0;
  std::size_t decisions = 0;
};

class Environment {
 public:
  virtual ~Environment() = default;
  [[nodiscard]] virtual EncoderContract contract() const = 0;
  virtual EpisodeSummary play(DecisionMaker& maker, std::uint64_t episode_seed) = 0;
};

/// Two valid actions; slot 0 always pays `dominant_reward`, slot 1 pays 0.
/// States are noise so only the action identity matters.
class ToyEnvironment final : public Environment {
 public:
  explicit ToyEnvironment(std::size_t steps_per_episode = 10, double dominant_reward = 200.0);
  [[nodiscard]] EncoderContract contract() const override { return contract_; }
  EpisodeSummary play(DecisionMaker& maker, std::uint64_t episode_seed) override;

 private:
  std::size_t steps_;
  double dominant_;
  EncoderContract contract_{1, 2, 1.0, 1.0};
};

/// Forwards each window to a DecisionMaker and pays the drop-task plus
/// latency-based reward for the chosen task. Tasks beyond W_max stay queued.
class AgentScheduler final : public Scheduler {
 public:
  AgentScheduler(DecisionMaker& maker, EncoderContract contract, std::string label = "agent");
  [[nodiscard]] std::string name() const override { return label_; }
  std::size_t select(const DecisionContext& ctx) override;
  [[nodiscard]] const EpisodeSummary& summary() const { return summary_; }

 private:
  DecisionMaker& maker_;
  EncoderContract contract_;
  std::string label_;
  EpisodeSummary summary_;
};

struct SimulationEnvConfig {
  ScenarioGeometry geometry;
  WorkloadModel workload;
  SimConfig sim;
  ChannelParams channel;
  EncoderContract contract;
  std::size_t vehicles = 100;
};

/// Fresh random trace and task set per episode; selection time is not charged.
class SimulationEnvironment final : public Environment {
 public:
  explicit SimulationEnvironment(SimulationEnvConfig cfg);
  [[nodiscard]] EncoderContract contract() const override { return cfg_.contract; }
  EpisodeSummary play(DecisionMaker& maker, std::uint64_t episode_seed) override;
  [[nodiscard]] const std::optional<EpisodeResult>& last_result() const { return last_; }

 private:
  SimulationEnvConfig cfg_;
  std::optional<EpisodeResult> last_;
};

/// Greedy decisions from a frozen policy; used for evaluation.
class GreedyMaker final : public DecisionMaker {
 public:
  explicit GreedyMaker(const Policy& policy) : policy_(policy) {}
  std::size_t decide(const Observation& obs) override;
  void feedback(double reward) override { total_ += reward; }
  [[nodiscard]] double total() const { return total_; }
  [[nodiscard]] const std::vector<std::size_t>& actions() const { return actions_; }

 private:
  const Policy& policy_;
  double total_ = 0.0;
  std::vector<std::size_t> actions_;
};

/// Mean greedy return of `policy` over the given episode seeds.
double evaluate_policy(Environment& env, const Policy& policy, const std::vector<std::uint64_t>& seeds);

}  // namespace vecoff::rl
