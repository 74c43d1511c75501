#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/rl/dqn.hpp"
#include "vecoff/rl/env.hpp"
#include "vecoff/rl/policy.hpp"

namespace vecoff::rl {

struct PpoParams {
  double learning_rate = 3e-4;
  double gamma = 0.95;
  double gae_lambda = 0.95;
  double clip = 0.2;
  std::size_t rollout = 2048;  // minimum transitions gathered before an update
  std::size_t epochs = 10;
  std::size_t minibatch = 64;
  double ent_coef = 0.0;
  double max_grad_norm = 0.5;
  double reward_scale = 0.01;
  std::size_t episodes = 2500;
  std::vector<std::size_t> hidden{128, 128};
  std::size_t eval_interval = 100;
  std::size_t eval_episodes = 3;
  bool operator==(const PpoParams&) const = default;
};

/// Masked softmax over logits; invalid entries get probability 0.
std::vector<double> masked_softmax(const Eigen::VectorXd& logits, const std::vector<bool>& mask);

/// Generalized advantage estimates for one flat rollout. `done[t]` ends the
/// trajectory after step t; a trajectory still open at the end bootstraps from
/// `last_value`.
std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<bool>& done, double last_value, double gamma, double lambda);

TrainingResult ppo_train(Environment& env, const PpoParams& params, std::uint64_t seed,
                         const EpisodeCallback& on_episode = {});

void to_json(nlohmann::json& j, const PpoParams& p);
void from_json(const nlohmann::json& j, PpoParams& p);

}  // namespace vecoff::rl
