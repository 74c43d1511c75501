#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/engine.hpp"
#include "vecoff/rl/encoding.hpp"
#include "vecoff/rl/nn.hpp"

namespace vecoff::rl {

enum class Algorithm { Dqn, Ppo };

const char* to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& text);

inline constexpr int kPolicyFormatVersion = 1;

struct TrainingMetadata {
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  bool operator==(const TrainingMetadata&) const = default;
};

/// A trained network plus the encoding it was trained against. DQN policies
/// use `q_network`; PPO policies use `actor` and `critic`.
struct Policy {
  Algorithm algorithm = Algorithm::Dqn;
  EncoderContract contract;
  Mlp q_network;
  Mlp actor;
  Mlp critic;
  TrainingMetadata training;
  bool operator==(const Policy&) const = default;
};

struct Decision {
  std::size_t action = 0;
  double estimate = 0.0;        // max Q for DQN, state value for PPO
  std::vector<double> scores;   // Q values or action probabilities (masked entries are -inf / 0)
};

/// Greedy choice over valid actions; ties go to the lowest slot.
Decision select(const Policy& policy, std::span<const double> state, const std::vector<bool>& mask);

class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Refuses to run a policy whose encoder contract disagrees with the simulator.
void check_contract(const Policy& policy, const SimConfig& cfg);

class PolicyFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);
void save_policy(const Policy& policy, const std::filesystem::path& path);
Policy load_policy(const std::filesystem::path& path);

/// Test-only deployment: frozen greedy decisions from a saved policy.
class PolicyScheduler final : public Scheduler {
 public:
  PolicyScheduler(Policy policy, const SimConfig& cfg);
  [[nodiscard]] std::string name() const override { return to_string(policy_.algorithm); }
  std::size_t select(const DecisionContext& ctx) override;
  [[nodiscard]] const Policy& policy() const { return policy_; }

 private:
  Policy policy_;
};

}  // namespace vecoff::rl
