#include <benchmark/benchmark.h>

#include <random>

#include "vecoff/experiments.hpp"
#include "vecoff/heuristics.hpp"

using namespace vecoff;

namespace {

// A window of `n` feasible tasks against two idle servers.
DecisionWindow make_window(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DecisionWindow w;
  for (std::size_t i = 0; i < n; ++i) {
    Task t;
    t.id = static_cast<std::int64_t>(i);
    t.arrival = u(rng);
    t.proc_time = 0.05 + 0.5 * u(rng);
    t.remaining_in_range = 2.0 + 8.0 * u(rng);
    t.deadline = t.arrival + t.remaining_in_range;
    t.size = 1e6;
    t.comm_time = 0.05;
    w.feasible.push_back(t);
  }
  w.queued = w.feasible;
  w.earliest_avail = 1.0;
  return w;
}

rl::Policy random_policy(rl::Algorithm algo, const SimConfig& cfg) {
  std::mt19937_64 rng(1);
  rl::Policy p;
  p.algorithm = algo;
  p.contract.num_mecs = cfg.num_mecs;
  p.contract.window_cap = cfg.window_cap;
  const auto in = rl::state_size(p.contract);
  if (algo == rl::Algorithm::Dqn) {
    p.q_network = rl::Mlp({in, 128, 128, cfg.window_cap}, rng);
  } else {
    p.actor = rl::Mlp({in, 128, 128, cfg.window_cap}, rng);
    p.critic = rl::Mlp({in, 128, 128, 1}, rng);
  }
  return p;
}

void bench_select(benchmark::State& state, const std::string& tag) {
  const ExperimentConfig cfg;
  PolicySet pols{random_policy(rl::Algorithm::Dqn, cfg.sim), random_policy(rl::Algorithm::Ppo, cfg.sim)};
  auto sched = make_scheduler(tag, cfg, 1, pols);
  const auto window = make_window(static_cast<std::size_t>(state.range(0)));
  const auto mecs = make_mecs(cfg.sim.num_mecs);
  const DecisionContext ctx{window, mecs, 1.0, cfg.sim};
  for (auto _ : state) benchmark::DoNotOptimize(sched->select(ctx));
}

void bench_episode(benchmark::State& state) {
  const ExperimentConfig cfg;
  const auto tasks = scenario_tasks(cfg, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    FcfsScheduler f;
    benchmark::DoNotOptimize(run_episode(tasks, f, cfg.sim, cfg.channel));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tasks.size()));
}

void bench_static_pso(benchmark::State& state) {
  const ExperimentConfig cfg;
  const auto tasks = scenario_tasks(cfg, static_cast<std::size_t>(state.range(0)), 1);
  auto sim = cfg.sim;
  sim.charge_exec_time = false;
  for (auto _ : state) benchmark::DoNotOptimize(pso_optimize_static(tasks, sim, cfg.channel, cfg.pso, 1));
}

}  // namespace

BENCHMARK_CAPTURE(bench_select, fcfs, std::string("fcfs"))->Arg(4)->Arg(16);
BENCHMARK_CAPTURE(bench_select, sdf, std::string("sdf"))->Arg(4)->Arg(16);
BENCHMARK_CAPTURE(bench_select, dqn, std::string("dqn"))->Arg(4)->Arg(16);
BENCHMARK_CAPTURE(bench_select, ppo, std::string("ppo"))->Arg(4)->Arg(16);
BENCHMARK_CAPTURE(bench_select, on_dyn_pso, std::string("on-dyn-pso"))->Arg(4)->Arg(16);
BENCHMARK(bench_episode)->Arg(50)->Arg(100)->Arg(200);
BENCHMARK(bench_static_pso)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
