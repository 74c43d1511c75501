#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vecoff/rl/dqn.hpp"
#include "vecoff/rl/env.hpp"
#include "vecoff/rl/ppo.hpp"

using namespace vecoff;
using namespace vecoff::rl;

namespace {

// Share of noise states on which the greedy policy picks slot 0.
double dominant_share(const Policy& p, std::size_t samples = 1000) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> s(state_size(p.contract));
    for (auto& v : s) v = noise(rng);
    if (select(p, s, {true, true}).action == 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

DqnParams toy_dqn() {
  DqnParams p;
  p.episodes = 500;
  p.learning_starts = 200;
  p.eval_interval = 50;
  return p;
}

PpoParams toy_ppo() {
  PpoParams p;
  p.episodes = 500;
  p.rollout = 200;
  p.eval_interval = 50;
  return p;
}

SimulationEnvConfig small_env() {
  SimulationEnvConfig cfg;
  cfg.vehicles = 40;
  return cfg;
}

}  // namespace

TEST_CASE("masked softmax") {
  Eigen::VectorXd logits(3);
  logits << 1.0, 2.0, 3.0;
  const auto p = masked_softmax(logits, {true, false, true});
  CHECK(p[1] == 0.0);
  CHECK(p[0] + p[2] == doctest::Approx(1.0));
  CHECK(p[2] / p[0] == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS(masked_softmax(logits, {false, false, false}));
}

TEST_CASE("GAE matches a direct recursion") {
  // Two trajectories: [r0, r1 | end], [r2, r3 ... open, bootstrap].
  const std::vector<double> r{1.0, 2.0, 0.5, -1.0};
  const std::vector<double> v{0.3, 0.1, 0.7, 0.2};
  const std::vector<bool> done{false, true, false, false};
  const double g = 0.9, l = 0.8, last = 0.6;
  const auto adv = gae(r, v, done, last, g, l);
  const double d1 = r[1] - v[1];
  const double d0 = r[0] + g * v[1] - v[0];
  const double d3 = r[3] + g * last - v[3];
  const double d2 = r[2] + g * v[3] - v[2];
  CHECK(adv[1] == doctest::Approx(d1));
  CHECK(adv[0] == doctest::Approx(d0 + g * l * d1));
  CHECK(adv[3] == doctest::Approx(d3));
  CHECK(adv[2] == doctest::Approx(d2 + g * l * d3));
}

TEST_CASE("replay buffer wraps at capacity") {
  ReplayBuffer buf(3, 2, 2);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> s{static_cast<double>(k), 0.0};
    buf.push(s, static_cast<std::size_t>(k % 2), k, s, {true, true}, k == 4);
  }
  CHECK(buf.size() == 3);
  std::mt19937_64 rng(1);
  const auto b = buf.sample(50, rng);
  for (Eigen::Index i = 0; i < b.rewards.size(); ++i) {
    CHECK(b.rewards(i) >= 2.0);
    CHECK(b.states(0, i) == b.rewards(i));
    if (b.done(i) == 1.0) CHECK(b.next_mask.col(i).sum() == 0.0);
  }
}

TEST_CASE("DQN learns the dominant action of the toy environment") {
  ToyEnvironment env;
  const auto result = dqn_train(env, toy_dqn(), 3);
  CHECK(result.reward_curve.size() == 500);
  CHECK(dominant_share(result.policy) >= 0.99);
  CHECK(result.policy.algorithm == Algorithm::Dqn);
}

TEST_CASE("PPO learns the dominant action of the toy environment") {
  ToyEnvironment env;
  const auto result = ppo_train(env, toy_ppo(), 3);
  CHECK(dominant_share(result.policy) >= 0.99);
  CHECK(result.policy.algorithm == Algorithm::Ppo);
}

TEST_CASE("training is reproducible for a fixed seed") {
  ToyEnvironment env;
  auto dp = toy_dqn();
  dp.episodes = 120;
  CHECK(dqn_train(env, dp, 11).reward_curve == dqn_train(env, dp, 11).reward_curve);
  auto pp = toy_ppo();
  pp.episodes = 120;
  const auto a = ppo_train(env, pp, 11);
  const auto b = ppo_train(env, pp, 11);
  CHECK(a.reward_curve == b.reward_curve);
  CHECK(a.policy == b.policy);
}

namespace {

// Records every observation it is shown and picks uniformly among valid slots.
class MaskAuditor final : public DecisionMaker {
 public:
  std::size_t decide(const Observation& obs) override {
    ++decisions;
    std::vector<std::size_t> valid;
    for (std::size_t a = 0; a < obs.mask.size(); ++a) {
      if (obs.mask[a]) valid.push_back(a);
    }
    if (valid.empty()) ++empty_masks;
    std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
    return valid[pick(rng)];
  }
  void feedback(double r) override {
    ++feedbacks;
    if (r < 0.0 || r > 200.0) ++out_of_range;
  }
  std::mt19937_64 rng{4};
  std::size_t decisions = 0;
  std::size_t feedbacks = 0;
  std::size_t empty_masks = 0;
  std::size_t out_of_range = 0;
};

}  // namespace

TEST_CASE("simulation environment contract") {
  SimulationEnvironment env(small_env());
  MaskAuditor auditor;
  const auto summary = env.play(auditor, 5);
  CHECK(summary.decisions == auditor.decisions);
  CHECK(auditor.feedbacks == auditor.decisions);
  CHECK(auditor.empty_masks == 0);
  CHECK(auditor.out_of_range == 0);
  REQUIRE(env.last_result());
  CHECK(env.last_result()->windows.size() == summary.decisions);
  CHECK(oracle::episode_violations(*env.last_result()).empty());

  MaskAuditor again;
  CHECK(env.play(again, 5).total_reward == summary.total_reward);
}

TEST_CASE("short training on the simulator yields a usable policy") {
  SimulationEnvironment env(small_env());
  auto dp = DqnParams{};
  dp.episodes = 30;
  dp.learning_starts = 100;
  dp.eval_interval = 10;
  const auto dqn = dqn_train(env, dp, 2);
  auto pp = PpoParams{};
  pp.episodes = 30;
  pp.rollout = 256;
  pp.eval_interval = 10;
  const auto ppo = ppo_train(env, pp, 2);
  SimConfig cfg;
  for (const auto* p : {&dqn.policy, &ppo.policy}) {
    PolicyScheduler sched(*p, cfg);
    std::mt19937_64 rng(3);
    auto tasks = oracle::random_tasks(rng, 30, 2.0);
    cfg.charge_exec_time = false;
    const auto r = run_episode(tasks, sched, cfg, ChannelParams{});
    CHECK(oracle::episode_violations(r).empty());
  }
}

TEST_CASE("learner params JSON round trips") {
  DqnParams d;
  d.episodes = 7;
  d.hidden = {32};
  CHECK(nlohmann::json(d).get<DqnParams>() == d);
  PpoParams p;
  p.clip = 0.1;
  p.rollout = 64;
  CHECK(nlohmann::json(p).get<PpoParams>() == p);
}
