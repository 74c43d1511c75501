#include "vecoff/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "text_util.hpp"
#include "vecoff/heuristics.hpp"
#include "vecoff/objective.hpp"
#include "vecoff/seeding.hpp"

namespace vecoff {

const std::vector<std::string>& algorithm_tags() {
  static const std::vector<std::string> tags{"off-sta-pso", "on-dyn-pso", "dqn", "ppo", "fcfs", "sdf"};
  return tags;
}

bool is_rl_tag(const std::string& tag) { return tag == "dqn" || tag == "ppo"; }

namespace {

bool known_tag(const std::string& tag) {
  const auto& tags = algorithm_tags();
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

template <class Fn>
void collect(std::vector<std::string>& problems, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  collect(problems, [&] { validate_config(cfg.sim); });
  collect(problems, [&] { validate_channel(cfg.channel); });
  collect(problems, [&] { validate_geometry(cfg.geometry); });
  collect(problems, [&] { validate_workload(cfg.workload); });
  collect(problems, [&] { validate_pso(cfg.pso); });
  for (const auto& tag : cfg.experiment.algorithms) {
    if (!known_tag(tag)) problems.push_back("unknown algorithm '" + tag + "'");
  }
  for (const auto& [tag, path] : cfg.policies) {
    if (!is_rl_tag(tag)) problems.push_back("policies: '" + tag + "' is not an RL algorithm");
  }
  if (cfg.experiment.vehicle_counts.empty()) problems.emplace_back("vehicle_counts must not be empty");
  for (auto v : cfg.experiment.vehicle_counts) {
    if (v == 0) problems.emplace_back("vehicle counts must be >= 1");
  }
  if (cfg.experiment.seeds.empty()) problems.emplace_back("seeds must not be empty");
  if (cfg.experiment.training_vehicles == 0) problems.emplace_back("training_vehicles must be >= 1");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  ExperimentConfig cfg;
  try {
    cfg = nlohmann::json::parse(in).get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  // Relative policy paths are resolved against the config's directory.
  for (auto& [tag, file] : cfg.policies) {
    std::filesystem::path p(file);
    if (p.is_relative()) file = (path.parent_path() / p).string();
  }
  validate(cfg);
  return cfg;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"sim", c.sim},
                     {"geometry", c.geometry},
                     {"workload", c.workload},
                     {"channel", c.channel},
                     {"pso", c.pso},
                     {"dqn", c.dqn},
                     {"ppo", c.ppo},
                     {"experiment",
                      {{"algorithms", c.experiment.algorithms},
                       {"vehicle_counts", c.experiment.vehicle_counts},
                       {"seeds", c.experiment.seeds},
                       {"training_vehicles", c.experiment.training_vehicles}}},
                     {"policies", c.policies}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  if (j.contains("sim")) c.sim = j.at("sim").get<SimConfig>();
  if (j.contains("geometry")) c.geometry = j.at("geometry").get<ScenarioGeometry>();
  if (j.contains("workload")) c.workload = j.at("workload").get<WorkloadModel>();
  if (j.contains("channel")) c.channel = j.at("channel").get<ChannelParams>();
  if (j.contains("pso")) c.pso = j.at("pso").get<PsoParams>();
  if (j.contains("dqn")) c.dqn = j.at("dqn").get<rl::DqnParams>();
  if (j.contains("ppo")) c.ppo = j.at("ppo").get<rl::PpoParams>();
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    const ExperimentSettings d;
    c.experiment.algorithms = e.value("algorithms", d.algorithms);
    c.experiment.vehicle_counts = e.value("vehicle_counts", d.vehicle_counts);
    c.experiment.seeds = e.value("seeds", d.seeds);
    c.experiment.training_vehicles = e.value("training_vehicles", d.training_vehicles);
  }
  if (j.contains("policies")) c.policies = j.at("policies").get<std::map<std::string, std::string>>();
}

ExecCostMap parse_exec_cost_map(const std::string& text) {
  ExecCostMap costs;
  if (detail::trim(text).empty()) return costs;
  for (auto item : detail::split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("exec-cost entry '" + std::string(item) + "' is not tag=seconds");
    }
    const std::string tag(detail::trim(item.substr(0, eq)));
    const auto value = detail::parse_double(detail::trim(item.substr(eq + 1)));
    if (!known_tag(tag)) throw std::invalid_argument("exec-cost map names unknown algorithm '" + tag + "'");
    if (!value || !std::isfinite(*value) || *value < 0.0) {
      throw std::invalid_argument("exec cost for '" + tag + "' must be a non-negative number");
    }
    costs[tag] = *value;
  }
  return costs;
}

std::vector<Task> scenario_tasks(const ExperimentConfig& cfg, std::size_t vehicles, std::uint64_t seed) {
  const auto trace = generate_trace(cfg.geometry, vehicles, derive_seed(seed, 0));
  return spawn_tasks(trace, cfg.workload, cfg.geometry, cfg.sim.tasks_per_vehicle, derive_seed(seed, 1)).tasks;
}

rl::SimulationEnvConfig training_env_config(const ExperimentConfig& cfg) {
  rl::SimulationEnvConfig env;
  env.geometry = cfg.geometry;
  env.workload = cfg.workload;
  env.sim = cfg.sim;
  env.channel = cfg.channel;
  env.contract.num_mecs = cfg.sim.num_mecs;
  env.contract.window_cap = cfg.sim.window_cap;
  env.vehicles = cfg.experiment.training_vehicles;
  return env;
}

std::unique_ptr<Scheduler> make_scheduler(const std::string& tag, const ExperimentConfig& cfg,
                                          std::uint64_t seed, const PolicySet& policies) {
  if (tag == "fcfs") return std::make_unique<FcfsScheduler>();
  if (tag == "sdf") return std::make_unique<SdfScheduler>();
  if (tag == "on-dyn-pso") return std::make_unique<DynamicPsoScheduler>(cfg.pso, derive_seed(seed, 2));
  if (tag == "dqn" || tag == "ppo") {
    const auto& policy = tag == "dqn" ? policies.dqn : policies.ppo;
    if (!policy) throw std::invalid_argument(tag + " needs a trained policy (--policy)");
    if (policy->algorithm != rl::algorithm_from_string(tag)) {
      throw std::invalid_argument("policy supplied for " + tag + " was trained with " +
                                  rl::to_string(policy->algorithm));
    }
    return std::make_unique<rl::PolicyScheduler>(*policy, cfg.sim);
  }
  throw std::invalid_argument("no online scheduler for '" + tag + "'");
}

RunRow summarize(const EpisodeResult& episode, const std::string& algo, std::size_t vehicles,
                 std::size_t run_index, std::uint64_t seed, double lambda, double total_exec_s) {
  RunRow row;
  row.algo = algo;
  row.vehicles = vehicles;
  row.run = std::to_string(run_index);
  row.seed = std::to_string(seed);
  const auto n = episode.num_tasks();
  row.drop_ratio = n ? static_cast<double>(episode.num_dropped) / static_cast<double>(n) : 0.0;
  double e2e = 0.0;
  double wait = 0.0;
  std::size_t served = 0;
  for (const auto& t : episode.tasks) {
    if (!t.assigned_mec) continue;
    e2e += t.e2e_latency.value_or(0.0);
    wait += t.waiting.value_or(0.0);
    ++served;
  }
  if (served) {
    row.mean_e2e_s = e2e / static_cast<double>(served);
    row.mean_wait_s = wait / static_cast<double>(served);
  }
  row.objective = objective(episode, lambda);
  row.objective_normalized = objective_normalized(episode, lambda);
  row.total_exec_s = total_exec_s;
  row.windows = static_cast<double>(episode.windows.size());
  row.per_window_exec_s = episode.windows.empty() ? total_exec_s : total_exec_s / row.windows;
  row.log10_exec = std::log10(row.per_window_exec_s);
  return row;
}

RunOutcome run_single(const ExperimentConfig& cfg, const std::string& algo, std::size_t vehicles,
                      std::uint64_t seed, std::size_t run_index, const PolicySet& policies,
                      const RunOptions& options) {
  if (!known_tag(algo)) throw std::invalid_argument("unknown algorithm '" + algo + "'");
  auto tasks = scenario_tasks(cfg, vehicles, seed);
  SimConfig sim = cfg.sim;
  sim.num_vehicles = vehicles;
  const auto synthetic_cost = [&]() -> std::optional<double> {
    if (!options.synthetic_costs) return std::nullopt;
    const auto it = options.synthetic_costs->find(algo);
    return it == options.synthetic_costs->end() ? 0.0 : it->second;
  }();

  RunOutcome out;
  double total_exec = 0.0;
  if (algo == "off-sta-pso") {
    sim.charge_exec_time = false;
    const auto t0 = std::chrono::steady_clock::now();
    const auto plan = pso_optimize_static(tasks, sim, cfg.channel, cfg.pso, derive_seed(seed, 2));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.episode = execute_plan(std::move(tasks), plan.ordering, sim, cfg.channel);
    total_exec = synthetic_cost.value_or(wall);
  } else {
    sim.charge_exec_time = options.charge_exec_time.value_or(cfg.sim.charge_exec_time);
    auto scheduler = make_scheduler(algo, cfg, seed, policies);
    EngineOptions engine;
    engine.synthetic_exec_cost = synthetic_cost;
    out.episode = run_episode(std::move(tasks), *scheduler, sim, cfg.channel, engine);
    for (const auto& w : out.episode.windows) total_exec += synthetic_cost ? w.decision_seconds : w.wall_seconds;
  }
  out.row = summarize(out.episode, algo, vehicles, run_index, seed, sim.lambda, total_exec);
  return out;
}

RunRow mean_row(const std::vector<RunRow>& runs) {
  RunRow m;
  m.run = "mean";
  if (runs.empty()) return m;
  m.algo = runs.front().algo;
  m.vehicles = runs.front().vehicles;
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    m.drop_ratio += r.drop_ratio / n;
    m.mean_e2e_s += r.mean_e2e_s / n;
    m.mean_wait_s += r.mean_wait_s / n;
    m.objective += r.objective / n;
    m.objective_normalized += r.objective_normalized / n;
    m.total_exec_s += r.total_exec_s / n;
    m.windows += r.windows / n;
    m.per_window_exec_s += r.per_window_exec_s / n;
  }
  m.log10_exec = std::log10(m.per_window_exec_s);
  return m;
}

PolicySet load_policies(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms) {
  PolicySet set;
  for (const auto& tag : algorithms) {
    if (!is_rl_tag(tag)) continue;
    const auto it = cfg.policies.find(tag);
    if (it == cfg.policies.end()) {
      throw std::invalid_argument("algorithm " + tag + " needs a policy file (--policy)");
    }
    auto policy = rl::load_policy(it->second);
    check_contract(policy, cfg.sim);
    (tag == "dqn" ? set.dqn : set.ppo) = std::move(policy);
  }
  return set;
}

std::vector<MetricsReport> run_matrix(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms,
                                      const std::vector<std::size_t>& vehicle_counts,
                                      const std::vector<std::uint64_t>& seeds, const PolicySet& policies,
                                      const RunOptions& options) {
  for (const auto& tag : algorithms) {
    if (!known_tag(tag)) throw std::invalid_argument("unknown algorithm '" + tag + "'");
    if (tag == "dqn" && !policies.dqn) throw std::invalid_argument("dqn needs a policy file (--policy)");
    if (tag == "ppo" && !policies.ppo) throw std::invalid_argument("ppo needs a policy file (--policy)");
  }
  std::vector<MetricsReport> reports;
  for (const auto& tag : algorithms) {
    for (auto vehicles : vehicle_counts) {
      MetricsReport report;
      report.algorithm = tag;
      report.vehicles = vehicles;
      report.exec_mode = options.synthetic_costs ? "synthetic" : "wall";
      for (std::size_t r = 0; r < seeds.size(); ++r) {
        report.runs.push_back(run_single(cfg, tag, vehicles, seeds[r], r + 1, policies, options).row);
      }
      report.mean = mean_row(report.runs);
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

namespace {

void write_row(std::ostream& out, const RunRow& r) {
  using detail::format_double;
  out << r.algo << ',' << r.vehicles << ',' << r.run << ',' << r.seed << ',' << format_double(r.drop_ratio)
      << ',' << format_double(r.mean_e2e_s) << ',' << format_double(r.mean_wait_s) << ','
      << format_double(r.objective) << ',' << format_double(r.objective_normalized) << ','
      << format_double(r.total_exec_s) << ',' << format_double(r.windows) << ','
      << format_double(r.per_window_exec_s) << ',' << format_double(r.log10_exec) << '\n';
}

nlohmann::json row_to_json(const RunRow& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  return {{"algo", r.algo},
          {"vehicles", r.vehicles},
          {"run", r.run},
          {"seed", r.seed},
          {"drop_ratio", r.drop_ratio},
          {"mean_e2e_s", r.mean_e2e_s},
          {"mean_wait_s", r.mean_wait_s},
          {"objective", r.objective},
          {"objective_normalized", r.objective_normalized},
          {"total_exec_s", r.total_exec_s},
          {"windows", r.windows},
          {"per_window_exec_s", r.per_window_exec_s},
          {"log10_exec", finite_or_null(r.log10_exec)}};
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << kReportHeader << '\n';
  for (const auto& report : reports) {
    for (const auto& r : report.runs) write_row(out, r);
    write_row(out, report.mean);
  }
}

std::vector<MetricsReport> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kReportHeader) {
    throw std::invalid_argument("report CSV header mismatch");
  }
  std::vector<MetricsReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 13) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 13 fields");
    auto num = [&](std::size_t k) {
      const auto v = detail::parse_double(f[k]);
      if (!v) throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + std::string(f[k]) + "'");
      return *v;
    };
    RunRow r;
    r.algo = std::string(f[0]);
    const auto vehicles = detail::parse_int<std::size_t>(f[1]);
    if (!vehicles) throw std::invalid_argument("line " + std::to_string(line_no) + ": bad vehicle count");
    r.vehicles = *vehicles;
    r.run = std::string(f[2]);
    r.seed = std::string(f[3]);
    r.drop_ratio = num(4);
    r.mean_e2e_s = num(5);
    r.mean_wait_s = num(6);
    r.objective = num(7);
    r.objective_normalized = num(8);
    r.total_exec_s = num(9);
    r.windows = num(10);
    r.per_window_exec_s = num(11);
    r.log10_exec = num(12);
    if (reports.empty() || reports.back().algorithm != r.algo || reports.back().vehicles != r.vehicles ||
        reports.back().mean.run == "mean") {
      MetricsReport report;
      report.algorithm = r.algo;
      report.vehicles = r.vehicles;
      reports.push_back(std::move(report));
    }
    if (r.run == "mean") {
      reports.back().mean = std::move(r);
    } else {
      reports.back().runs.push_back(std::move(r));
    }
  }
  return reports;
}

nlohmann::json reports_to_json(const std::vector<MetricsReport>& reports) {
  auto arr = nlohmann::json::array();
  for (const auto& report : reports) {
    auto runs = nlohmann::json::array();
    for (const auto& r : report.runs) runs.push_back(row_to_json(r));
    arr.push_back({{"algorithm", report.algorithm},
                   {"vehicles", report.vehicles},
                   {"exec_mode", report.exec_mode},
                   {"runs", runs},
                   {"mean", row_to_json(report.mean)}});
  }
  return arr;
}

void export_reports(const std::vector<MetricsReport>& reports, ExportFormat format,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (format == ExportFormat::Csv) {
    write_csv(out, reports);
  } else {
    out << reports_to_json(reports).dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace vecoff
