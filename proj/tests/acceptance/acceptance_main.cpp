// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when a criterion fails that was not listed with --expect-fail.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vecoff/experiments.hpp"
#include "vecoff/heuristics.hpp"
#include "vecoff/objective.hpp"
#include "vecoff/rl/env.hpp"
#include "vecoff/rl/reward.hpp"

using namespace vecoff;

namespace {

// Tolerances and thresholds.
constexpr double kOracleRel = 1e-9;
constexpr double kStaticHitShare = 0.90;
constexpr double kLatencyRel = 1e-9;
constexpr double kBandwidthRel = 1e-9;
constexpr double kRewardRel = 1e-9;
constexpr double kScaleRel = 1e-12;
constexpr double kToyShare = 0.99;
constexpr double kCurveGain = 1.20;
constexpr double kSpeedup = 10.0;
constexpr double kWindowBand = 0.5;
constexpr double kGradientRel = 1e-4;
constexpr std::uint64_t kTrainSeed = 7;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig sim(std::size_t mecs, bool charge) {
  SimConfig cfg;
  cfg.num_mecs = mecs;
  cfg.charge_exec_time = charge;
  return cfg;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Shared state: trained policies and the wall-clock runs several criteria read.
struct Suite {
  std::filesystem::path workdir;
  bool reuse = false;
  std::size_t dqn_episodes = 0;
  std::size_t ppo_episodes = 200;
  ExperimentConfig cfg;
  std::optional<rl::TrainingResult> dqn;
  std::optional<rl::TrainingResult> ppo;
  std::map<std::string, std::vector<RunRow>> wall100;  // 100 vehicles, charging on

  PolicySet policies() {
    train();
    return {dqn->policy, ppo->policy};
  }

  void train() {
    if (dqn && ppo) return;
    std::filesystem::create_directories(workdir);
    const auto dqn_file = workdir / "dqn.json";
    const auto curve_file = workdir / "dqn_curve.csv";
    const auto ppo_file = workdir / "ppo.json";
    rl::SimulationEnvironment env(training_env_config(cfg));
    if (reuse && std::filesystem::exists(dqn_file) && std::filesystem::exists(curve_file)) {
      dqn = rl::TrainingResult{rl::load_policy(dqn_file), read_curve(curve_file), {}};
      std::cout << "  reusing " << dqn_file.string() << '\n';
    } else {
      auto params = cfg.dqn;
      if (dqn_episodes) params.episodes = dqn_episodes;
      std::cout << "  training DQN for " << params.episodes << " episodes" << std::endl;
      const auto t0 = std::chrono::steady_clock::now();
      dqn = rl::dqn_train(env, params, kTrainSeed, [](std::size_t ep, double r) {
        if ((ep + 1) % 250 == 0) std::cout << "    episode " << ep + 1 << " reward " << r << std::endl;
      });
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - t0;
      std::cout << "  DQN training took " << took.count() << " s" << std::endl;
      rl::save_policy(dqn->policy, dqn_file);
      rl::write_reward_curve(curve_file, dqn->reward_curve);
    }
    if (reuse && std::filesystem::exists(ppo_file)) {
      ppo = rl::TrainingResult{rl::load_policy(ppo_file), {}, {}};
    } else {
      auto params = cfg.ppo;
      params.episodes = ppo_episodes;
      ppo = rl::ppo_train(env, params, kTrainSeed);
      rl::save_policy(ppo->policy, ppo_file);
    }
  }

  static std::vector<double> read_curve(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<double> curve;
    while (std::getline(in, line)) curve.push_back(std::stod(line.substr(line.find(',') + 1)));
    return curve;
  }

  const std::vector<RunRow>& runs100(const std::string& algo) {
    auto it = wall100.find(algo);
    if (it != wall100.end()) return it->second;
    const auto pols = policies();
    RunOptions opts;
    opts.charge_exec_time = true;
    std::vector<RunRow> rows;
    for (std::size_t k = 0; k < cfg.experiment.seeds.size(); ++k) {
      rows.push_back(run_single(cfg, algo, 100, cfg.experiment.seeds[k], k + 1, pols, opts).row);
    }
    return wall100[algo] = std::move(rows);
  }
};

Outcome oracle_bound(Suite& s) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> n_dist(1, 6);
  int static_hits = 0;
  int violations = 0;
  const int instances = 50;
  std::string first_bad;
  for (int k = 0; k < instances; ++k) {
    const std::size_t m = 1 + static_cast<std::size_t>(k % 2);
    const auto cfg = sim(m, false);
    const auto tasks = oracle::random_tasks(rng, n_dist(rng));
    const auto best = brute_force_oracle(tasks, cfg, s.cfg.channel);
    const auto stat = pso_optimize_static(tasks, cfg, s.cfg.channel, s.cfg.pso, 500 + k);
    FcfsScheduler fcfs;
    SdfScheduler sdf;
    DynamicPsoScheduler dyn(s.cfg.pso, 900 + k);
    std::vector<std::pair<const char*, double>> rivals{
        {"off-sta-pso", stat.objective},
        {"fcfs", objective(run_episode(tasks, fcfs, cfg, s.cfg.channel), cfg.lambda)},
        {"sdf", objective(run_episode(tasks, sdf, cfg, s.cfg.channel), cfg.lambda)},
        {"on-dyn-pso", objective(run_episode(tasks, dyn, cfg, s.cfg.channel), cfg.lambda)}};
    for (const auto& [name, value] : rivals) {
      if (best.objective > value * (1 + kOracleRel) + 1e-15) {
        ++violations;
        if (first_bad.empty()) first_bad = fmt(" (instance %d, %s %.6g < oracle %.6g)", k, name, value, best.objective);
      }
    }
    if (stat.objective <= best.objective * (1 + kOracleRel) + 1e-15) ++static_hits;
  }
  const double share = static_cast<double>(static_hits) / instances;
  return {violations == 0 && share >= kStaticHitShare,
          fmt("oracle violations %d/%d, static PSO at optimum %.0f%%", violations, instances * 4, 100 * share) +
              first_bad};
}

Outcome static_limit(Suite& s) {
  const auto pols = s.policies();
  int violations = 0;
  int checks = 0;
  std::string worst;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double limit = run_single(s.cfg, "off-sta-pso", 50, seed, seed, pols).row.objective;
    for (const auto& algo : algorithm_tags()) {
      if (algo == "off-sta-pso") continue;
      const double v = run_single(s.cfg, algo, 50, seed, seed, pols).row.objective;
      ++checks;
      if (limit > v) {
        ++violations;
        if (worst.empty()) worst = fmt(" (seed %llu: off-sta %.4g > %s %.4g)", static_cast<unsigned long long>(seed), limit, algo.c_str(), v);
      }
    }
  }
  return {violations == 0, fmt("violations %d/%d", violations, checks) + worst};
}

Outcome latency_exact(Suite&) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  int completed = 0;
  int dropped = 0;
  for (int k = 0; k < 1000; ++k) {
    ChannelParams ch;
    ch.bandwidth_max = 1e6 + 4e7 * u(rng);
    ch.tx_power = 0.1 + 2 * u(rng);
    ch.channel_gain = 0.1 + 2 * u(rng);
    ch.noise_density = 0.05 + u(rng);
    const std::size_t m = 1 + static_cast<std::size_t>(k % 3);
    EngineOptions opts;
    for (std::size_t j = 0; j < m; ++j) opts.initial_availability.push_back(3.0 * u(rng));
    Task t;
    t.arrival = 3.0 * u(rng);
    t.proc_time = 0.05 + u(rng);
    t.remaining_in_range = 0.3 + 6.0 * u(rng);
    t.deadline = t.arrival + t.remaining_in_range;
    t.size = 1e5 + 2e7 * u(rng);
    FcfsScheduler f;
    const auto r = run_episode({t}, f, sim(m, false), ch, opts);
    const double avail = *std::min_element(opts.initial_availability.begin(), opts.initial_availability.end());
    const auto want = oracle::single_task(t.arrival, t.proc_time, t.size, avail, {}, ch.bandwidth_max,
                                          ch.tx_power, ch.channel_gain, ch.noise_density);
    const auto& got = r.tasks.front();
    const bool late = want.start + t.proc_time + want.comm > t.deadline;
    if (late) {
      ++dropped;
      if (got.status != TaskStatus::Dropped) ++mismatches;
      continue;
    }
    ++completed;
    if (got.status != TaskStatus::Completed || !oracle::rel_close(*got.comp_latency, want.comp, kLatencyRel) ||
        !oracle::rel_close(*got.comm_time, want.comm, kLatencyRel) ||
        !oracle::rel_close(*got.e2e_latency, want.e2e, kLatencyRel) ||
        !oracle::rel_close(*got.waiting, want.waiting, kLatencyRel)) {
      ++mismatches;
    }
  }
  return {mismatches == 0, fmt("mismatches %d (completed %d, dropped %d)", mismatches, completed, dropped)};
}

Outcome bandwidth(Suite& s) {
  const auto tasks = scenario_tasks(s.cfg, 200, 1);
  FcfsScheduler f;
  const auto r = run_episode(tasks, f, s.cfg.sim, s.cfg.channel);
  const double b = s.cfg.channel.bandwidth_max;
  int bad = 0;
  int singles = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < r.comm.sets.size(); ++i) {
    const auto& alloc = r.comm.allocations[i];
    const double sum = std::accumulate(alloc.begin(), alloc.end(), 0.0);
    worst = std::max(worst, std::abs(sum - b) / b);
    if (!oracle::rel_close(sum, b, kBandwidthRel)) ++bad;
    if (alloc.size() == 1) {
      ++singles;
      if (alloc.front() != b) ++bad;
    }
  }
  return {bad == 0 && !r.comm.sets.empty(),
          fmt("%zu sets (%d singletons), worst relative error %.2e", r.comm.sets.size(), singles, worst)};
}

Outcome reward_algebra(Suite&) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> w_dist(2, 16);
  int bad_sum = 0, bad_oracle = 0, bad_argmax = 0, bad_scale = 0;
  for (int k = 0; k < 10'000; ++k) {
    const double t = 10.0 * u(rng);
    std::vector<Task> window(w_dist(rng));
    std::vector<double> gaps, procs;
    for (auto& task : window) {
      task.proc_time = 0.01 + u(rng);
      task.deadline = t + 0.01 + 8.0 * u(rng);
      gaps.push_back(task.deadline - t);
      procs.push_back(task.proc_time);
    }
    auto scaled = window;
    for (auto& task : scaled) task.deadline = t + 3.0 * (task.deadline - t);
    double best_d = -1, best_l = -1;
    std::size_t arg_d = 0, arg_l = 0;
    for (std::size_t c = 0; c < window.size(); ++c) {
      const auto r = rl::reward(window, c, t);
      if (r.r_total != r.r_drop + r.r_latency) ++bad_sum;
      const auto want = oracle::reward(gaps, procs, c);
      if (!oracle::rel_close(r.r_drop, want.r_drop, kRewardRel) ||
          !oracle::rel_close(r.r_latency, want.r_latency, kRewardRel)) {
        ++bad_oracle;
      }
      if (r.r_drop > best_d) best_d = r.r_drop, arg_d = c;
      if (r.r_latency > best_l) best_l = r.r_latency, arg_l = c;
      if (!oracle::rel_close(rl::reward(scaled, c, t).r_drop, r.r_drop, kScaleRel)) ++bad_scale;
    }
    if (gaps[arg_d] != *std::min_element(gaps.begin(), gaps.end())) ++bad_argmax;
    if (procs[arg_l] != *std::min_element(procs.begin(), procs.end())) ++bad_argmax;
  }
  return {bad_sum + bad_oracle + bad_argmax + bad_scale == 0,
          fmt("sum %d, oracle %d, argmax %d, scale %d mismatches over 10000 windows", bad_sum, bad_oracle,
              bad_argmax, bad_scale)};
}

Outcome degenerate_reward(Suite&) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int k = 0; k < 1000; ++k) {
    Task task;
    task.proc_time = 0.01 + u(rng);
    task.deadline = 5.0 + 5.0 * u(rng);
    const auto r = rl::reward(std::span<const Task>(&task, 1), 0, 5.0 * u(rng));
    if (r.r_drop != 0.0 || r.r_latency != 0.0 || r.r_total != 0.0) ++bad;
  }
  return {bad == 0, fmt("nonzero rewards %d/1000", bad)};
}

double dominant_share(const rl::Policy& p) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  int hits = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> st(rl::state_size(p.contract));
    for (auto& v : st) v = noise(rng);
    if (rl::select(p, st, {true, true}).action == 0) ++hits;
  }
  return hits / 1000.0;
}

Outcome learning_signal(Suite& s) {
  rl::ToyEnvironment toy;
  rl::DqnParams tp;
  tp.episodes = 500;
  tp.learning_starts = 200;
  tp.eval_interval = 50;
  const double share = dominant_share(rl::dqn_train(toy, tp, 3).policy);

  s.train();
  const auto& curve = s.dqn->reward_curve;
  const std::size_t k = std::max<std::size_t>(1, curve.size() / 10);
  const double first = mean({curve.begin(), curve.begin() + static_cast<long>(k)});
  const double last = mean({curve.end() - static_cast<long>(k), curve.end()});
  const double gain = last / first;
  return {share >= kToyShare && gain >= kCurveGain,
          fmt("toy dominant share %.3f; full curve %zu episodes, first 10%% %.1f, last 10%% %.1f, ratio %.3f",
              share, curve.size(), first, last, gain)};
}

Outcome timing(Suite& s) {
  auto per_window = [&](const std::string& algo) {
    std::vector<double> v;
    for (const auto& r : s.runs100(algo)) v.push_back(r.per_window_exec_s);
    return mean(v);
  };
  const double dqn = per_window("dqn");
  const double ppo = per_window("ppo");
  const double pso = per_window("on-dyn-pso");
  return {dqn < ppo && ppo < pso && pso >= kSpeedup * dqn,
          fmt("per-window s: dqn %.3g, ppo %.3g, on-dyn-pso %.3g (pso/dqn %.1fx, dqn vs pso -%.1f%%, dqn vs ppo -%.1f%%)",
              dqn, ppo, pso, pso / dqn, 100 * (1 - dqn / pso), 100 * (1 - dqn / ppo))};
}

Outcome kpis(Suite& s) {
  auto avg = [&](const std::string& algo, double RunRow::*field) {
    std::vector<double> v;
    for (const auto& r : s.runs100(algo)) v.push_back(r.*field);
    return mean(v);
  };
  const double dqn_drop = avg("dqn", &RunRow::drop_ratio);
  const double pso_drop = avg("on-dyn-pso", &RunRow::drop_ratio);
  const double dqn_e2e = avg("dqn", &RunRow::mean_e2e_s);
  const double pso_e2e = avg("on-dyn-pso", &RunRow::mean_e2e_s);
  return {dqn_drop <= pso_drop && dqn_e2e <= pso_e2e,
          fmt("drop ratio dqn %.4f vs on-dyn-pso %.4f; mean e2e dqn %.4f s vs on-dyn-pso %.4f s (%+.1f%%)", dqn_drop,
              pso_drop, dqn_e2e, pso_e2e, 100 * (dqn_e2e / pso_e2e - 1))};
}

Outcome window_counts(Suite& s) {
  const auto pols = s.policies();
  const std::vector<std::pair<std::size_t, double>> targets{{50, 20}, {100, 62}, {200, 178}};
  bool ok = true;
  std::string detail;
  for (const auto& [vehicles, target] : targets) {
    std::vector<double> w;
    for (auto seed : s.cfg.experiment.seeds) w.push_back(run_single(s.cfg, "dqn", vehicles, seed, 1, pols).row.windows);
    const double m = mean(w);
    ok = ok && std::abs(m - target) <= kWindowBand * target;
    detail += fmt("%s%zu vehicles %.1f (target %.0f)", detail.empty() ? "" : ", ", vehicles, m, target);
  }
  return {ok, detail};
}

Outcome fuzz(Suite&) {
  std::mt19937_64 rng(1111);
  std::uniform_int_distribution<std::size_t> n_dist(1, 14);
  std::uniform_int_distribution<std::size_t> m_dist(1, 3);
  int failures = 0;
  std::string first;
  for (int k = 0; k < 10'000; ++k) {
    auto tasks = oracle::random_tasks(rng, n_dist(rng));
    RandomScheduler sched(rng());
    EngineOptions opts;
    const bool charge = k % 2 == 0;
    if (charge) opts.synthetic_exec_cost = 0.05;
    const auto r = run_episode(tasks, sched, sim(m_dist(rng), charge), ChannelParams{}, opts);
    const auto bad = oracle::episode_violations(r);
    if (!bad.empty()) {
      ++failures;
      if (first.empty()) first = " (" + bad.front() + ")";
    }
  }
  return {failures == 0, fmt("episodes with violations %d/10000", failures) + first};
}

Outcome determinism(Suite& s) {
  const auto pols = s.policies();
  RunOptions opts;
  opts.synthetic_costs = parse_exec_cost_map("off-sta-pso=2,on-dyn-pso=0.5,dqn=0.014,ppo=0.03,fcfs=0.001,sdf=0.001");
  auto report = [&](const std::filesystem::path& path) {
    const auto reports = run_matrix(s.cfg, algorithm_tags(), {50, 100}, {1, 2, 3}, pols, opts);
    export_reports(reports, ExportFormat::Csv, path);
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto a = report(s.workdir / "determinism_a.csv");
  const auto b = report(s.workdir / "determinism_b.csv");
  return {a == b && !a.empty(), fmt("%zu bytes, %s", a.size(), a == b ? "identical" : "different")};
}

Outcome persistence(Suite& s) {
  s.train();
  const auto& in_memory = s.dqn->policy;
  const auto file = s.workdir / "persist.json";
  rl::save_policy(in_memory, file);
  const auto loaded = rl::load_policy(file);
  auto cfg = s.cfg.sim;
  cfg.charge_exec_time = false;
  int mismatches = 0;
  std::size_t decisions = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto tasks = scenario_tasks(s.cfg, 100, seed);
    rl::PolicyScheduler a(in_memory, cfg);
    rl::PolicyScheduler b(loaded, cfg);
    const auto ra = run_episode(tasks, a, cfg, s.cfg.channel);
    const auto rb = run_episode(tasks, b, cfg, s.cfg.channel);
    decisions += ra.windows.size();
    if (ra.decision_sequence() != rb.decision_sequence() ||
        objective(ra, cfg.lambda) != objective(rb, cfg.lambda)) {
      ++mismatches;
    }
  }
  return {mismatches == 0 && loaded == in_memory,
          fmt("%zu decisions over 3 seeds, mismatching episodes %d, weights %s", decisions, mismatches,
              loaded == in_memory ? "identical" : "different")};
}

Outcome gradients(Suite&) {
  std::mt19937_64 rng(1414);
  std::uniform_int_distribution<std::size_t> width(1, 8);
  std::uniform_int_distribution<std::size_t> depth(1, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<std::size_t> sizes{width(rng)};
    for (std::size_t d = depth(rng); d > 0; --d) sizes.push_back(width(rng));
    sizes.push_back(width(rng));
    rl::Mlp net(sizes, rng);
    // Random biases too: zero biases behind a dead unit put pre-activations exactly on the ReLU kink.
    auto params = net.flatten();
    for (auto& p : params) p = normal(rng);
    net.unflatten(params);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(net.input_size()), 4);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(net.output_size()), 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    auto loss = [&](const rl::Mlp& n) { return (n.forward(x, nullptr).array() * w.array()).sum(); };
    rl::Mlp::Cache cache;
    net.forward(x, &cache);
    const auto g = net.backward(cache, w);
    rl::Mlp probe = net;
    // Flatten the analytic gradient through a copy whose parameters are the gradient.
    rl::Mlp grad_net = net;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
      grad_net.weights()[l] = g.weights[l];
      grad_net.biases()[l] = g.biases[l];
    }
    const auto analytic = grad_net.flatten();
    const auto flat = net.flatten();
    std::vector<double> numeric(flat.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      auto plus = flat;
      auto minus = flat;
      plus[i] += h;
      minus[i] -= h;
      probe.unflatten(plus);
      const double fp = loss(probe);
      probe.unflatten(minus);
      numeric[i] = (fp - loss(probe)) / (2 * h);
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return {worst < kGradientRel, fmt("worst relative error %.2e over 20 networks", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  Suite suite;
  std::string workdir = "acceptance_work";
  std::string config;
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--workdir", workdir, "scratch directory for policies and reports");
  app.add_option("--config", config, "experiment config JSON")->check(CLI::ExistingFile);
  app.add_option("--expect-fail", expect_fail, "criteria known to fail; they still print FAIL")->delimiter(',');
  app.add_option("--only", only, "run just these criteria")->delimiter(',');
  app.add_option("--dqn-episodes", suite.dqn_episodes, "override the configured DQN episode count");
  app.add_flag("--reuse", suite.reuse, "reuse policies already in the workdir");
  CLI11_PARSE(app, argc, argv);
  suite.workdir = workdir;
  if (!config.empty()) suite.cfg = load_config(config);

  const std::vector<std::pair<const char*, std::function<Outcome(Suite&)>>> criteria{
      {"oracle optimality bound", oracle_bound},
      {"static PSO is a lower bound", static_limit},
      {"latency model exactness", latency_exact},
      {"bandwidth conservation", bandwidth},
      {"reward algebra", reward_algebra},
      {"degenerate rewards", degenerate_reward},
      {"DQN learning signal", learning_signal},
      {"execution-time ordering", timing},
      {"comparative KPIs", kpis},
      {"decision window counts", window_counts},
      {"engine invariants fuzz", fuzz},
      {"report determinism", determinism},
      {"policy persistence", persistence},
      {"gradient correctness", gradients},
  };
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second(suite);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - t0;
    const bool known = expected.contains(id);
    if (!out.pass && !known) ++unexpected;
    std::cout << (out.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << criteria[i].first << ": " << out.detail
              << fmt(" [%.1f s]", took.count()) << (!out.pass && known ? " (expected)" : "") << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
