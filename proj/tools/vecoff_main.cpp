// Command-line front end: trace generation, training, single runs, the
// algorithm matrix and report export.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "vecoff/experiments.hpp"
#include "vecoff/rl/dqn.hpp"
#include "vecoff/rl/env.hpp"
#include "vecoff/rl/ppo.hpp"
#include "vecoff/seeding.hpp"

namespace {

using namespace vecoff;

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::vector<std::string> policies;
  std::string exec_cost;
  bool exec_cost_set = false;
};

ExperimentConfig read_config(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  for (const auto& file : c.policies) {
    const auto policy = rl::load_policy(file);
    cfg.policies[rl::to_string(policy.algorithm)] = file;
  }
  return cfg;
}

RunOptions run_options(const Common& c) {
  RunOptions opts;
  if (c.exec_cost_set) opts.synthetic_costs = parse_exec_cost_map(c.exec_cost);
  return opts;
}

void write_reports(const std::vector<MetricsReport>& reports, const std::string& out) {
  if (out.empty()) {
    write_csv(std::cout, reports);
  } else {
    export_reports(reports, ExportFormat::Csv, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task offloading simulator for vehicular edge computing"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment config JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "scenario / training seed");
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--policy", common.policies, "trained policy file (repeatable)")->check(CLI::ExistingFile);
    sub->add_option("--synthetic-exec-cost", common.exec_cost,
                    "charge fixed per-window costs instead of wall clock, e.g. dqn=0.014,on-dyn-pso=1");
  };

  auto* gen = app.add_subcommand("gen-trace", "write a synthetic mobility trace as CSV");
  add_common(gen);
  std::size_t gen_vehicles = 50;
  std::string gen_out;
  gen->add_option("--vehicles", gen_vehicles, "number of vehicles");
  gen->add_option("--out", gen_out, "output CSV (stdout if omitted)");

  auto* train = app.add_subcommand("train", "train a DQN or PPO policy on random traces");
  add_common(train);
  std::string train_algo;
  std::string train_out = "policy.json";
  std::string curve_out;
  std::optional<std::size_t> train_episodes;
  train->add_option("--algo", train_algo, "dqn or ppo")->required()->check(CLI::IsMember({"dqn", "ppo"}));
  train->add_option("--out", train_out, "policy output file");
  train->add_option("--curve", curve_out, "reward curve CSV");
  train->add_option("--episodes", train_episodes, "override the configured episode count");

  auto* run = app.add_subcommand("run", "run one algorithm on one seeded scenario");
  add_common(run);
  add_run_flags(run);
  std::string run_algo;
  std::optional<std::size_t> run_vehicles;
  std::string run_out;
  std::string run_dump;
  run->add_option("--algo", run_algo, "algorithm tag")->required()->check(CLI::IsMember(algorithm_tags()));
  run->add_option("--vehicles", run_vehicles, "vehicle count (default: first configured count)");
  run->add_option("--out", run_out, "report CSV (stdout if omitted)");
  run->add_option("--dump", run_dump, "episode dump (JSON lines)");

  auto* matrix = app.add_subcommand("matrix", "every configured algorithm x density x seed");
  add_common(matrix);
  add_run_flags(matrix);
  std::string matrix_out;
  std::string matrix_json;
  matrix->add_option("--out", matrix_out, "report CSV (stdout if omitted)");
  matrix->add_option("--json", matrix_json, "also write the reports as JSON");

  auto* exp = app.add_subcommand("export", "convert a report CSV");
  std::string export_in;
  std::string export_out;
  std::string export_format = "json";
  exp->add_option("--in", export_in, "report CSV")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", export_out, "destination")->required();
  exp->add_option("--format", export_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (auto* sub : {run, matrix}) {
    if (sub->parsed() && sub->count("--synthetic-exec-cost")) common.exec_cost_set = true;
  }

  try {
    if (gen->parsed()) {
      const auto cfg = read_config(common);
      const auto trace = generate_trace(cfg.geometry, gen_vehicles, derive_seed(common.seed, 0));
      if (gen_out.empty()) {
        write_trace(std::cout, trace);
      } else {
        write_trace(gen_out, trace);
      }
    } else if (train->parsed()) {
      const auto cfg = read_config(common);
      rl::SimulationEnvironment env(training_env_config(cfg));
      auto progress = [](std::size_t ep, double reward) {
        if ((ep + 1) % 100 == 0) std::cerr << "episode " << ep + 1 << " reward " << reward << '\n';
      };
      rl::TrainingResult result;
      if (train_algo == "dqn") {
        auto params = cfg.dqn;
        if (train_episodes) params.episodes = *train_episodes;
        result = rl::dqn_train(env, params, common.seed, progress);
      } else {
        auto params = cfg.ppo;
        if (train_episodes) params.episodes = *train_episodes;
        result = rl::ppo_train(env, params, common.seed, progress);
      }
      rl::save_policy(result.policy, train_out);
      if (!curve_out.empty()) rl::write_reward_curve(curve_out, result.reward_curve);
      std::cerr << "wrote " << train_out << '\n';
    } else if (run->parsed()) {
      const auto cfg = read_config(common);
      const auto policies = load_policies(cfg, {run_algo});
      const auto vehicles = run_vehicles.value_or(cfg.experiment.vehicle_counts.front());
      auto outcome = run_single(cfg, run_algo, vehicles, common.seed, 1, policies, run_options(common));
      MetricsReport report;
      report.algorithm = run_algo;
      report.vehicles = vehicles;
      report.runs.push_back(outcome.row);
      report.mean = mean_row(report.runs);
      write_reports({report}, run_out);
      if (!run_dump.empty()) write_episode_dump(run_dump, outcome.episode);
    } else if (matrix->parsed()) {
      const auto cfg = read_config(common);
      const auto& algos = cfg.experiment.algorithms;
      const auto policies = load_policies(cfg, algos);
      const auto reports = run_matrix(cfg, algos, cfg.experiment.vehicle_counts, cfg.experiment.seeds,
                                      policies, run_options(common));
      write_reports(reports, matrix_out);
      if (!matrix_json.empty()) export_reports(reports, ExportFormat::Json, matrix_json);
    } else if (exp->parsed()) {
      std::ifstream in(export_in);
      const auto reports = read_csv(in);
      export_reports(reports, export_format == "csv" ? ExportFormat::Csv : ExportFormat::Json, export_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
