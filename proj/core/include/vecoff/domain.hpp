#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace vecoff {

/// Slack used when comparing simulation instants (deadline checks, feasibility).
inline constexpr double kTimeTolerance = 1e-9;

/// Two offload-ready instants closer than this are treated as simultaneous.
inline constexpr double kSimultaneityTolerance = 1e-6;

enum class TaskStatus { Pending, Assigned, Completed, Dropped };

const char* to_string(TaskStatus status);
TaskStatus task_status_from_string(const std::string& text);

/// One offloadable unit of work. All times are absolute simulation seconds.
struct Task {
  std::int64_t id = 0;
  std::int64_t vehicle_id = 0;
  double arrival = 0.0;             // RSU arrival instant
  double size = 0.0;                // bits
  double proc_time = 0.0;           // seconds of MEC processing
  double deadline = 0.0;            // absolute, = arrival + remaining_in_range
  double remaining_in_range = 0.0;  // seconds of coverage left at arrival

  std::optional<double> start_proc;
  std::optional<double> waiting;
  std::optional<double> comm_time;  // one-way transfer time
  std::optional<double> comp_latency;
  std::optional<double> e2e_latency;
  std::optional<std::size_t> assigned_mec;  // 0-based server index
  TaskStatus status = TaskStatus::Pending;

  /// Result-return instant: processing end plus the downlink transfer.
  [[nodiscard]] double return_time() const;
  [[nodiscard]] bool operator==(const Task&) const = default;
};

/// Raised when a lifecycle transition or a task invariant is violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Throws InvariantError if `task` breaks one of its field invariants.
void check_task(const Task& task);

/// Pending -> Assigned -> Completed, Pending -> Dropped. Anything else throws.
void transition(Task& task, TaskStatus next);

struct BusyInterval {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const BusyInterval&) const = default;
};

struct MecState {
  std::size_t id = 0;  // 0-based
  double available_at = 0.0;
  std::vector<BusyInterval> busy_intervals;

  /// Appends [start, end) and moves the availability to `end`.
  void occupy(double start, double end);
  bool operator==(const MecState&) const = default;
};

std::vector<MecState> make_mecs(std::size_t count);

struct ChannelParams {
  double bandwidth_max = 20e6;  // Hz
  double tx_power = 1.0;        // W
  double channel_gain = 1.0;
  double noise_density = 1.0;   // W
  bool operator==(const ChannelParams&) const = default;
};

struct SimConfig {
  std::size_t num_mecs = 2;
  double lambda = 0.4;
  std::size_t num_vehicles = 50;
  std::size_t tasks_per_vehicle = 1;
  std::uint64_t rng_seed = 1;
  std::size_t window_cap = 16;
  bool charge_exec_time = true;
  bool operator==(const SimConfig&) const = default;
};

/// Aggregates every violated invariant; what() lists them one per line.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

SimConfig validate_config(const SimConfig& cfg);
ChannelParams validate_channel(const ChannelParams& ch);

void to_json(nlohmann::json& j, const Task& t);
void from_json(const nlohmann::json& j, Task& t);
void to_json(nlohmann::json& j, const BusyInterval& b);
void from_json(const nlohmann::json& j, BusyInterval& b);
void to_json(nlohmann::json& j, const MecState& m);
void from_json(const nlohmann::json& j, MecState& m);
void to_json(nlohmann::json& j, const ChannelParams& c);
void from_json(const nlohmann::json& j, ChannelParams& c);
void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

}  // namespace vecoff
