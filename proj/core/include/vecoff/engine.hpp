#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vecoff/channel.hpp"
#include "vecoff/domain.hpp"

namespace vecoff {

/// Tasks waiting at one decision instant. `feasible` keeps arrival order.
struct DecisionWindow {
  std::size_t index = 0;  // y
  std::vector<Task> queued;
  std::vector<Task> feasible;
  double earliest_avail = 0.0;
};

enum class EventKind { MecFree = 0, TaskArrival = 1 };

struct EngineEvent {
  EventKind kind = EventKind::TaskArrival;
  double time = 0.0;
  std::int64_t payload = 0;  // task index or server index
};

/// Strict ordering used by the event queue: time, then MecFree before
/// TaskArrival, then payload.
bool event_before(const EngineEvent& a, const EngineEvent& b);

struct WindowRecord {
  std::size_t index = 0;
  std::size_t queued = 0;    // W
  std::size_t feasible = 0;  // W_y
  double decision_seconds = 0.0;  // duration charged or recorded for this invocation
  double wall_seconds = 0.0;      // measured wall clock of the selection call
  std::int64_t chosen_task = -1;
};

struct EpisodeResult {
  std::vector<Task> tasks;
  std::vector<MecState> mecs;
  std::size_t num_dropped = 0;
  std::size_t num_completed = 0;
  std::vector<WindowRecord> windows;
  CommPlan comm;

  [[nodiscard]] std::size_t num_tasks() const { return tasks.size(); }
  [[nodiscard]] std::size_t num_mecs() const { return mecs.size(); }
  [[nodiscard]] double total_decision_seconds() const;
  [[nodiscard]] std::vector<std::int64_t> decision_sequence() const;
};

struct DecisionContext {
  const DecisionWindow& window;
  std::span<const MecState> mecs;
  double now = 0.0;
  const SimConfig& cfg;
};

/// Picks one task of a non-empty window. Implementations may keep state
/// across calls within an episode.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// Index into ctx.window.feasible.
  virtual std::size_t select(const DecisionContext& ctx) = 0;
  virtual void on_episode_end(const EpisodeResult& /*result*/) {}
};

struct EngineOptions {
  /// Replaces the measured wall clock of every selection call when set.
  std::optional<double> synthetic_exec_cost;
  /// Per-server availability at time zero; empty means all idle.
  std::vector<double> initial_availability;
};

/// argmin over available_at, ties to the lowest index.
std::pair<std::size_t, double> earliest_availability(std::span<const MecState> mecs);

/// Whether `task` can start at `start` (or at its arrival, if later) and still
/// return its result by the deadline.
bool feasible_at(const Task& task, double start);

struct WindowBuild {
  DecisionWindow window;
  std::vector<std::int64_t> dropped;  // ids that can never be served again
};

/// S = pending tasks arrived by t_e_av. Q_y = members whose projected waiting
/// fits inside remaining_in_range - proc_time - comm_time. The rest are
/// provably infeasible (availability only grows) and reported as dropped.
WindowBuild build_window(std::span<const Task> pending, double t_e_av, std::size_t index = 0);

/// Starts `task` on `server` no earlier than `clock`. Throws InvariantError when
/// the task would miss its deadline.
void assign(Task& task, MecState& server, double clock);

/// Advances the clock by a non-negative selection duration.
double charge_exec_time(double clock, double duration);

/// Runs the decision-window protocol over `tasks` (sorted by arrival).
EpisodeResult run_episode(std::vector<Task> tasks, Scheduler& scheduler, const SimConfig& cfg,
                          const ChannelParams& channel, const EngineOptions& options = {});

struct ReplayStats {
  double latency_sum = 0.0;
  std::size_t assigned = 0;
  std::size_t dropped = 0;
};

/// Greedy list replay used by the offline planners: tasks are taken in
/// `order`, each goes to the earliest-available server and starts at
/// max(availability, arrival, not_before), or is dropped if it would be late.
/// `availability` is updated in place. Tasks must carry comm_time.
ReplayStats replay_stats(std::span<const Task> tasks, std::span<const std::size_t> order,
                         std::span<double> availability, double not_before = 0.0);

/// Same replay, producing full task records.
EpisodeResult execute_plan(std::vector<Task> tasks, std::span<const std::size_t> order,
                           const SimConfig& cfg, const ChannelParams& channel);

void write_episode_dump(std::ostream& out, const EpisodeResult& result);
void write_episode_dump(const std::filesystem::path& path, const EpisodeResult& result);
EpisodeResult read_episode_dump(std::istream& in);

}  // namespace vecoff
