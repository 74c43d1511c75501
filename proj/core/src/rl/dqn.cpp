#include "vecoff/rl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "../text_util.hpp"
#include "vecoff/seeding.hpp"

namespace vecoff::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_size, std::size_t actions)
    : capacity_(capacity), state_size_(state_size), actions_(actions) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
  states_.resize(capacity * state_size);
  next_states_.resize(capacity * state_size);
  next_mask_.resize(capacity * actions);
  action_.resize(capacity);
  reward_.resize(capacity);
  done_.resize(capacity);
}

void ReplayBuffer::push(std::span<const double> state, std::size_t action, double reward,
                        std::span<const double> next_state, const std::vector<bool>& next_mask,
                        bool done) {
  std::copy(state.begin(), state.end(), states_.begin() + static_cast<std::ptrdiff_t>(head_ * state_size_));
  if (done) {
    std::fill_n(next_states_.begin() + static_cast<std::ptrdiff_t>(head_ * state_size_), state_size_, 0.0);
    std::fill_n(next_mask_.begin() + static_cast<std::ptrdiff_t>(head_ * actions_), actions_, 0.0);
  } else {
    std::copy(next_state.begin(), next_state.end(),
              next_states_.begin() + static_cast<std::ptrdiff_t>(head_ * state_size_));
    for (std::size_t a = 0; a < actions_; ++a) next_mask_[head_ * actions_ + a] = next_mask[a] ? 1.0 : 0.0;
  }
  action_[head_] = action;
  reward_[head_] = reward;
  done_[head_] = done ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  Batch b;
  const auto n = static_cast<Eigen::Index>(batch);
  b.states.resize(static_cast<Eigen::Index>(state_size_), n);
  b.next_states.resize(static_cast<Eigen::Index>(state_size_), n);
  b.next_mask.resize(static_cast<Eigen::Index>(actions_), n);
  b.rewards.resize(n);
  b.done.resize(n);
  b.actions.resize(batch);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t i = pick(rng);
    b.states.col(k) = Eigen::Map<const Eigen::VectorXd>(&states_[i * state_size_],
                                                        static_cast<Eigen::Index>(state_size_));
    b.next_states.col(k) = Eigen::Map<const Eigen::VectorXd>(&next_states_[i * state_size_],
                                                             static_cast<Eigen::Index>(state_size_));
    b.next_mask.col(k) = Eigen::Map<const Eigen::VectorXd>(&next_mask_[i * actions_],
                                                           static_cast<Eigen::Index>(actions_));
    b.actions[static_cast<std::size_t>(k)] = action_[i];
    b.rewards(k) = reward_[i];
    b.done(k) = done_[i];
  }
  return b;
}

namespace {

std::vector<std::size_t> network_shape(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

class DqnLearner final : public DecisionMaker {
 public:
  DqnLearner(const EncoderContract& contract, const DqnParams& params, std::uint64_t seed)
      : params_(params),
        contract_(contract),
        rng_(seed),
        replay_(params.replay_capacity, state_size(contract), contract.window_cap) {
    online_ = Mlp(network_shape(state_size(contract), params.hidden, contract.window_cap), rng_);
    target_ = online_;
    optimizer_ = Adam(online_, params.learning_rate);
  }

  void set_epsilon(double eps) { epsilon_ = eps; }

  std::size_t decide(const Observation& obs) override {
    if (pending_) {
      replay_.push(pending_->state, pending_->action, pending_->reward, obs.state, obs.mask, false);
      on_step();
    }
    std::size_t action = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) < epsilon_) {
      std::vector<std::size_t> valid;
      for (std::size_t a = 0; a < obs.mask.size(); ++a) {
        if (obs.mask[a]) valid.push_back(a);
      }
      std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
      action = valid[pick(rng_)];
    } else {
      action = select(snapshot_view(), obs.state, obs.mask).action;
    }
    pending_ = Pending{obs.state, action, 0.0};
    return action;
  }

  void feedback(double reward) override {
    if (pending_) pending_->reward = reward * params_.reward_scale;
  }

  void end_episode() {
    if (pending_) {
      replay_.push(pending_->state, pending_->action, pending_->reward, {}, {}, true);
      pending_.reset();
      on_step();
    }
  }

  [[nodiscard]] Policy snapshot(std::size_t episodes, std::uint64_t seed) const {
    Policy p;
    p.algorithm = Algorithm::Dqn;
    p.contract = contract_;
    p.q_network = online_;
    p.training = {episodes, seed};
    return p;
  }

 private:
  struct Pending {
    std::vector<double> state;
    std::size_t action;
    double reward;
  };

  const Policy& snapshot_view() {
    view_.algorithm = Algorithm::Dqn;
    view_.contract = contract_;
    if (view_dirty_) {
      view_.q_network = online_;
      view_dirty_ = false;
    }
    return view_;
  }

  void on_step() {
    ++steps_;
    if (replay_.size() >= std::max(params_.learning_starts, params_.batch_size) &&
        steps_ % params_.train_freq == 0) {
      train_batch();
    }
    if (steps_ % params_.target_sync == 0) target_ = online_;
  }

  void train_batch() {
    const auto batch = replay_.sample(params_.batch_size, rng_);
    const auto n = static_cast<Eigen::Index>(params_.batch_size);

    const Eigen::MatrixXd next_q = target_.forward(batch.next_states, nullptr);
    Mlp::Cache cache;
    const Eigen::MatrixXd q = online_.forward(batch.states, &cache);

    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    double loss = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      double best_next = 0.0;
      if (batch.done(k) == 0.0) {
        best_next = -std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < next_q.rows(); ++a) {
          if (batch.next_mask(a, k) > 0.0) best_next = std::max(best_next, next_q(a, k));
        }
        if (!std::isfinite(best_next)) best_next = 0.0;
      }
      const double target = batch.rewards(k) + params_.gamma * (1.0 - batch.done(k)) * best_next;
      const auto a = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(k)]);
      const double td = q(a, k) - target;
      // Huber loss with unit threshold.
      loss += std::abs(td) <= 1.0 ? 0.5 * td * td : std::abs(td) - 0.5;
      grad(a, k) = std::clamp(td, -1.0, 1.0) / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw DivergenceError("DQN loss became non-finite");
    auto g = online_.backward(cache, grad);
    clip_gradients(g, params_.max_grad_norm);
    optimizer_.step(online_, g);
    view_dirty_ = true;
  }

  DqnParams params_;
  EncoderContract contract_;
  std::mt19937_64 rng_;
  ReplayBuffer replay_;
  Mlp online_;
  Mlp target_;
  Adam optimizer_;
  double epsilon_ = 1.0;
  std::size_t steps_ = 0;
  std::optional<Pending> pending_;
  Policy view_;
  bool view_dirty_ = true;
};

}  // namespace

TrainingResult dqn_train(Environment& env, const DqnParams& params, std::uint64_t seed,
                         const EpisodeCallback& on_episode) {
  if (params.batch_size == 0 || params.target_sync == 0 || params.train_freq == 0) {
    throw std::invalid_argument("batch_size, target_sync and train_freq must be > 0");
  }
  const auto contract = env.contract();
  DqnLearner learner(contract, params, derive_seed(seed, 0));

  std::vector<std::uint64_t> eval_seeds;
  for (std::size_t k = 0; k < params.eval_episodes; ++k) eval_seeds.push_back(derive_seed(seed, 1000 + k));

  TrainingResult result;
  double best_eval = -std::numeric_limits<double>::infinity();
  const double anneal = std::max(1.0, params.epsilon_fraction * static_cast<double>(params.episodes));
  for (std::size_t ep = 0; ep < params.episodes; ++ep) {
    const double frac = std::min(1.0, static_cast<double>(ep) / anneal);
    learner.set_epsilon(params.epsilon_start + frac * (params.epsilon_end - params.epsilon_start));
    const auto summary = env.play(learner, derive_seed(seed, 1'000'000 + ep));
    learner.end_episode();
    result.reward_curve.push_back(summary.total_reward);
    if (on_episode) on_episode(ep, summary.total_reward);

    const bool last = ep + 1 == params.episodes;
    if ((params.eval_interval && (ep + 1) % params.eval_interval == 0) || last) {
      auto candidate = learner.snapshot(ep + 1, seed);
      const double value = evaluate_policy(env, candidate, eval_seeds);
      result.eval_returns.push_back(value);
      if (value > best_eval) {
        best_eval = value;
        result.policy = std::move(candidate);
      }
    }
  }
  if (params.episodes == 0) result.policy = learner.snapshot(0, seed);
  result.policy.training = {params.episodes, seed};
  return result;
}

void write_reward_curve(const std::filesystem::path& path, std::span<const double> curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "episode,total_reward\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out << i << ',' << detail::format_double(curve[i]) << '\n';
}

void to_json(nlohmann::json& j, const DqnParams& p) {
  j = nlohmann::json{{"learning_rate", p.learning_rate},
                     {"gamma", p.gamma},
                     {"replay_capacity", p.replay_capacity},
                     {"batch_size", p.batch_size},
                     {"target_sync", p.target_sync},
                     {"epsilon_start", p.epsilon_start},
                     {"epsilon_end", p.epsilon_end},
                     {"epsilon_fraction", p.epsilon_fraction},
                     {"episodes", p.episodes},
                     {"learning_starts", p.learning_starts},
                     {"train_freq", p.train_freq},
                     {"hidden", p.hidden},
                     {"reward_scale", p.reward_scale},
                     {"max_grad_norm", p.max_grad_norm},
                     {"eval_interval", p.eval_interval},
                     {"eval_episodes", p.eval_episodes}};
}

void from_json(const nlohmann::json& j, DqnParams& p) {
  const DqnParams d;
  p.learning_rate = j.value("learning_rate", d.learning_rate);
  p.gamma = j.value("gamma", d.gamma);
  p.replay_capacity = j.value("replay_capacity", d.replay_capacity);
  p.batch_size = j.value("batch_size", d.batch_size);
  p.target_sync = j.value("target_sync", d.target_sync);
  p.epsilon_start = j.value("epsilon_start", d.epsilon_start);
  p.epsilon_end = j.value("epsilon_end", d.epsilon_end);
  p.epsilon_fraction = j.value("epsilon_fraction", d.epsilon_fraction);
  p.episodes = j.value("episodes", d.episodes);
  p.learning_starts = j.value("learning_starts", d.learning_starts);
  p.train_freq = j.value("train_freq", d.train_freq);
  p.hidden = j.value("hidden", d.hidden);
  p.reward_scale = j.value("reward_scale", d.reward_scale);
  p.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  p.eval_interval = j.value("eval_interval", d.eval_interval);
  p.eval_episodes = j.value("eval_episodes", d.eval_episodes);
}

}  // namespace vecoff::rl
