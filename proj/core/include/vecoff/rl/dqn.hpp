#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/rl/env.hpp"
#include "vecoff/rl/nn.hpp"
#include "vecoff/rl/policy.hpp"

namespace vecoff::rl {

struct DqnParams {
  double learning_rate = 1e-4;
  double gamma = 0.9;
  std::size_t replay_capacity = 50'000;
  std::size_t batch_size = 64;
  std::size_t target_sync = 500;  // environment steps between target copies
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.6;  // share of episodes over which epsilon anneals
  std::size_t episodes = 2500;
  std::size_t learning_starts = 1000;
  std::size_t train_freq = 1;
  std::vector<std::size_t> hidden{128, 128};
  double reward_scale = 0.01;  // rewards are multiplied by this before learning
  double max_grad_norm = 10.0;
  std::size_t eval_interval = 100;
  std::size_t eval_episodes = 3;
  bool operator==(const DqnParams&) const = default;
};

struct TrainingResult {
  Policy policy;                     // best evaluated snapshot
  std::vector<double> reward_curve;  // total training reward per episode
  std::vector<double> eval_returns;  // one per evaluation point
};

/// Raised when a loss or gradient stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform experience replay with fixed capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_size, std::size_t actions);
  void push(std::span<const double> state, std::size_t action, double reward,
            std::span<const double> next_state, const std::vector<bool>& next_mask, bool done);
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }

  struct Batch {
    Eigen::MatrixXd states;       // state_size x B
    Eigen::MatrixXd next_states;  // state_size x B
    Eigen::MatrixXd next_mask;    // actions x B, 1 where valid
    std::vector<std::size_t> actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd done;
  };
  Batch sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t state_size_;
  std::size_t actions_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<double> next_mask_;
  std::vector<std::size_t> action_;
  std::vector<double> reward_;
  std::vector<double> done_;
};

/// Called after every training episode with (episode index, episode reward).
using EpisodeCallback = std::function<void(std::size_t, double)>;

TrainingResult dqn_train(Environment& env, const DqnParams& params, std::uint64_t seed,
                         const EpisodeCallback& on_episode = {});

void write_reward_curve(const std::filesystem::path& path, std::span<const double> curve);

void to_json(nlohmann::json& j, const DqnParams& p);
void from_json(const nlohmann::json& j, DqnParams& p);

}  // namespace vecoff::rl
