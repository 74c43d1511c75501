#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/domain.hpp"
#include "vecoff/engine.hpp"
#include "vecoff/mobility.hpp"
#include "vecoff/pso.hpp"
#include "vecoff/rl/dqn.hpp"
#include "vecoff/rl/policy.hpp"
#include "vecoff/rl/ppo.hpp"

namespace vecoff {

/// Algorithm tags accepted by the harness, in report order.
const std::vector<std::string>& algorithm_tags();
bool is_rl_tag(const std::string& tag);

struct ExperimentSettings {
  std::vector<std::string> algorithms = algorithm_tags();
  std::vector<std::size_t> vehicle_counts{50, 100, 200};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t training_vehicles = 100;
  bool operator==(const ExperimentSettings&) const = default;
};

struct ExperimentConfig {
  SimConfig sim;
  ScenarioGeometry geometry;
  WorkloadModel workload;
  ChannelParams channel;
  PsoParams pso;
  rl::DqnParams dqn;
  rl::PpoParams ppo;
  ExperimentSettings experiment;
  std::map<std::string, std::string> policies;  // tag -> policy file
  bool operator==(const ExperimentConfig&) const = default;
};

/// Validates every section and throws ConfigError listing all problems.
void validate(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Per-algorithm selection cost in seconds, e.g. "dqn=0.014,on-dyn-pso=1.2".
/// Algorithms missing from the map cost 0.
using ExecCostMap = std::map<std::string, double>;
ExecCostMap parse_exec_cost_map(const std::string& text);

/// The seeded task set for one (vehicle count, seed) cell; identical for every algorithm.
std::vector<Task> scenario_tasks(const ExperimentConfig& cfg, std::size_t vehicles, std::uint64_t seed);

/// Training environment for the configured training density.
rl::SimulationEnvConfig training_env_config(const ExperimentConfig& cfg);

struct PolicySet {
  std::optional<rl::Policy> dqn;
  std::optional<rl::Policy> ppo;
};

/// Online scheduler for a dynamic tag. RL tags need the matching policy.
std::unique_ptr<Scheduler> make_scheduler(const std::string& tag, const ExperimentConfig& cfg,
                                          std::uint64_t seed, const PolicySet& policies);

struct RunRow {
  std::string algo;
  std::size_t vehicles = 0;
  std::string run;   // run number, or "mean"
  std::string seed;  // empty on the mean row
  double drop_ratio = 0.0;
  double mean_e2e_s = 0.0;
  double mean_wait_s = 0.0;
  double objective = 0.0;
  double objective_normalized = 0.0;
  double total_exec_s = 0.0;
  double windows = 0.0;
  double per_window_exec_s = 0.0;
  double log10_exec = 0.0;
  bool operator==(const RunRow&) const = default;
};

struct RunOutcome {
  RunRow row;
  EpisodeResult episode;
};

struct RunOptions {
  std::optional<ExecCostMap> synthetic_costs;  // wall clock when empty
  /// Overrides charge_exec_time for the dynamic algorithms.
  std::optional<bool> charge_exec_time;
};

/// One algorithm on one seeded scenario. Off-Sta-PSO is planned offline and
/// never charged; the dynamic algorithms go through the online engine.
RunOutcome run_single(const ExperimentConfig& cfg, const std::string& algo, std::size_t vehicles,
                      std::uint64_t seed, std::size_t run_index, const PolicySet& policies,
                      const RunOptions& options = {});

/// Fills per-window and log10 columns and the derived KPIs from an episode.
RunRow summarize(const EpisodeResult& episode, const std::string& algo, std::size_t vehicles,
                 std::size_t run_index, std::uint64_t seed, double lambda, double total_exec_s);

struct MetricsReport {
  std::string algorithm;
  std::size_t vehicles = 0;
  std::string exec_mode;  // "wall" or "synthetic"
  std::vector<RunRow> runs;
  RunRow mean;
  bool operator==(const MetricsReport&) const = default;
};

/// Arithmetic mean row over `runs`.
RunRow mean_row(const std::vector<RunRow>& runs);

/// Loads the policies named in the config for every RL tag in `algorithms`.
/// Throws before any run when one is missing.
PolicySet load_policies(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms);

std::vector<MetricsReport> run_matrix(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms,
                                      const std::vector<std::size_t>& vehicle_counts,
                                      const std::vector<std::uint64_t>& seeds, const PolicySet& policies,
                                      const RunOptions& options = {});

inline constexpr const char* kReportHeader =
    "algo,vehicles,run,seed,drop_ratio,mean_e2e_s,mean_wait_s,objective,objective_normalized,"
    "total_exec_s,windows,per_window_exec_s,log10_exec";

void write_csv(std::ostream& out, const std::vector<MetricsReport>& reports);
std::vector<MetricsReport> read_csv(std::istream& in);
nlohmann::json reports_to_json(const std::vector<MetricsReport>& reports);

enum class ExportFormat { Csv, Json };
void export_reports(const std::vector<MetricsReport>& reports, ExportFormat format,
                    const std::filesystem::path& path);

}  // namespace vecoff
