#include "vecoff/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "vecoff/seeding.hpp"

namespace vecoff::rl {

std::vector<double> masked_softmax(const Eigen::VectorXd& logits, const std::vector<bool>& mask) {
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (mask[a]) peak = std::max(peak, logits(static_cast<Eigen::Index>(a)));
  }
  if (!std::isfinite(peak)) throw std::invalid_argument("action mask has no valid entry");
  std::vector<double> p(mask.size(), 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    p[a] = std::exp(logits(static_cast<Eigen::Index>(a)) - peak);
    total += p[a];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<bool>& done, double last_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || done.size() != n) throw std::invalid_argument("rollout columns differ in length");
  std::vector<double> adv(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = done[t] ? 0.0 : (t + 1 < n ? values[t + 1] : last_value);
    const double carry = done[t] ? 0.0 : running;
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * carry;
    adv[t] = running;
  }
  return adv;
}

namespace {

std::vector<std::size_t> network_shape(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

class PpoLearner final : public DecisionMaker {
 public:
  PpoLearner(const EncoderContract& contract, const PpoParams& params, std::uint64_t seed)
      : params_(params), contract_(contract), rng_(seed) {
    const auto in = state_size(contract);
    actor_ = Mlp(network_shape(in, params.hidden, contract.window_cap), rng_, 0.01);
    critic_ = Mlp(network_shape(in, params.hidden, 1), rng_);
    actor_opt_ = Adam(actor_, params.learning_rate);
    critic_opt_ = Adam(critic_, params.learning_rate);
  }

  std::size_t decide(const Observation& obs) override {
    const Eigen::Map<const Eigen::VectorXd> x(obs.state.data(), static_cast<Eigen::Index>(obs.state.size()));
    const auto probs = masked_softmax(actor_.forward(Eigen::VectorXd(x)), obs.mask);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    const std::size_t action = pick(rng_);
    states_.push_back(obs.state);
    masks_.push_back(obs.mask);
    actions_.push_back(action);
    logp_.push_back(std::log(probs[action]));
    values_.push_back(critic_.forward(Eigen::VectorXd(x))(0));
    rewards_.push_back(0.0);
    done_.push_back(false);
    return action;
  }

  void feedback(double reward) override {
    if (!rewards_.empty()) rewards_.back() = reward * params_.reward_scale;
  }

  void end_episode() {
    if (!done_.empty()) done_.back() = true;
    if (states_.size() >= params_.rollout) update();
  }

  [[nodiscard]] Policy snapshot(std::size_t episodes, std::uint64_t seed) const {
    Policy p;
    p.algorithm = Algorithm::Ppo;
    p.contract = contract_;
    p.actor = actor_;
    p.critic = critic_;
    p.training = {episodes, seed};
    return p;
  }

 private:
  void update() {
    const std::size_t n = states_.size();
    const auto adv_raw = gae(rewards_, values_, done_, 0.0, params_.gamma, params_.gae_lambda);
    std::vector<double> returns(n);
    for (std::size_t t = 0; t < n; ++t) returns[t] = adv_raw[t] + values_[t];
    const double mean = std::accumulate(adv_raw.begin(), adv_raw.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv_raw) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n)) + 1e-8;
    std::vector<double> adv(n);
    for (std::size_t t = 0; t < n; ++t) adv[t] = (adv_raw[t] - mean) / sd;

    const auto dim = static_cast<Eigen::Index>(state_size(contract_));
    const auto actions = static_cast<Eigen::Index>(contract_.window_cap);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < params_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t start = 0; start < n; start += params_.minibatch) {
        const std::size_t end = std::min(n, start + params_.minibatch);
        const auto b = static_cast<Eigen::Index>(end - start);
        Eigen::MatrixXd x(dim, b);
        for (Eigen::Index k = 0; k < b; ++k) {
          const auto& s = states_[order[start + static_cast<std::size_t>(k)]];
          x.col(k) = Eigen::Map<const Eigen::VectorXd>(s.data(), dim);
        }
        Mlp::Cache actor_cache;
        Mlp::Cache critic_cache;
        const Eigen::MatrixXd logits = actor_.forward(x, &actor_cache);
        const Eigen::MatrixXd v = critic_.forward(x, &critic_cache);
        Eigen::MatrixXd grad_logits = Eigen::MatrixXd::Zero(actions, b);
        Eigen::MatrixXd grad_v(1, b);
        for (Eigen::Index k = 0; k < b; ++k) {
          const std::size_t t = order[start + static_cast<std::size_t>(k)];
          const auto p = masked_softmax(logits.col(k), masks_[t]);
          const std::size_t a = actions_[t];
          const double ratio = std::exp(std::log(p[a]) - logp_[t]);
          const double A = adv[t];
          // d(-clipped surrogate)/d(log pi(a)); zero once the clip is active.
          const bool clipped = (A >= 0.0 && ratio > 1.0 + params_.clip) || (A < 0.0 && ratio < 1.0 - params_.clip);
          const double g_logp = clipped ? 0.0 : -A * ratio;
          double entropy = 0.0;
          for (double q : p) {
            if (q > 0.0) entropy -= q * std::log(q);
          }
          for (Eigen::Index i = 0; i < actions; ++i) {
            const double pi = p[static_cast<std::size_t>(i)];
            if (!masks_[t][static_cast<std::size_t>(i)]) continue;
            double g = g_logp * ((static_cast<std::size_t>(i) == a ? 1.0 : 0.0) - pi);
            if (params_.ent_coef > 0.0 && pi > 0.0) g += params_.ent_coef * pi * (std::log(pi) + entropy);
            grad_logits(i, k) = g / static_cast<double>(b);
          }
          grad_v(0, k) = (v(0, k) - returns[t]) / static_cast<double>(b);
        }
        auto ga = actor_.backward(actor_cache, grad_logits);
        auto gc = critic_.backward(critic_cache, grad_v);
        if (!std::isfinite(ga.norm()) || !std::isfinite(gc.norm())) {
          throw DivergenceError("PPO gradients became non-finite");
        }
        clip_gradients(ga, params_.max_grad_norm);
        clip_gradients(gc, params_.max_grad_norm);
        actor_opt_.step(actor_, ga);
        critic_opt_.step(critic_, gc);
      }
    }
    states_.clear();
    masks_.clear();
    actions_.clear();
    logp_.clear();
    values_.clear();
    rewards_.clear();
    done_.clear();
  }

  PpoParams params_;
  EncoderContract contract_;
  std::mt19937_64 rng_;
  Mlp actor_;
  Mlp critic_;
  Adam actor_opt_;
  Adam critic_opt_;
  std::vector<std::vector<double>> states_;
  std::vector<std::vector<bool>> masks_;
  std::vector<std::size_t> actions_;
  std::vector<double> logp_;
  std::vector<double> values_;
  std::vector<double> rewards_;
  std::vector<bool> done_;
};

}  // namespace

TrainingResult ppo_train(Environment& env, const PpoParams& params, std::uint64_t seed,
                         const EpisodeCallback& on_episode) {
  if (params.minibatch == 0 || params.rollout == 0) throw std::invalid_argument("rollout and minibatch must be > 0");
  PpoLearner learner(env.contract(), params, derive_seed(seed, 0));

  std::vector<std::uint64_t> eval_seeds;
  for (std::size_t k = 0; k < params.eval_episodes; ++k) eval_seeds.push_back(derive_seed(seed, 1000 + k));

  TrainingResult result;
  double best_eval = -std::numeric_limits<double>::infinity();
  for (std::size_t ep = 0; ep < params.episodes; ++ep) {
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

void to_json(nlohmann::json& j, const PpoParams& p) {
  j = nlohmann::json{{"learning_rate", p.learning_rate},
                     {"gamma", p.gamma},
                     {"gae_lambda", p.gae_lambda},
                     {"clip", p.clip},
                     {"rollout", p.rollout},
                     {"epochs", p.epochs},
                     {"minibatch", p.minibatch},
                     {"ent_coef", p.ent_coef},
                     {"max_grad_norm", p.max_grad_norm},
                     {"reward_scale", p.reward_scale},
                     {"episodes", p.episodes},
                     {"hidden", p.hidden},
                     {"eval_interval", p.eval_interval},
                     {"eval_episodes", p.eval_episodes}};
}

void from_json(const nlohmann::json& j, PpoParams& p) {
  const PpoParams d;
  p.learning_rate = j.value("learning_rate", d.learning_rate);
  p.gamma = j.value("gamma", d.gamma);
  p.gae_lambda = j.value("gae_lambda", d.gae_lambda);
  p.clip = j.value("clip", d.clip);
  p.rollout = j.value("rollout", d.rollout);
  p.epochs = j.value("epochs", d.epochs);
  p.minibatch = j.value("minibatch", d.minibatch);
  p.ent_coef = j.value("ent_coef", d.ent_coef);
  p.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  p.reward_scale = j.value("reward_scale", d.reward_scale);
  p.episodes = j.value("episodes", d.episodes);
  p.hidden = j.value("hidden", d.hidden);
  p.eval_interval = j.value("eval_interval", d.eval_interval);
  p.eval_episodes = j.value("eval_episodes", d.eval_episodes);
}

}  // namespace vecoff::rl
