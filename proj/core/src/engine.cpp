#include "vecoff/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <queue>
#include <stdexcept>

namespace vecoff {

namespace {

struct EventLater {
  bool operator()(const EngineEvent& a, const EngineEvent& b) const { return event_before(b, a); }
};

void finalize(EpisodeResult& result) {
  result.num_completed = 0;
  result.num_dropped = 0;
  for (auto& t : result.tasks) {
    if (t.status == TaskStatus::Assigned) {
      if (t.return_time() > t.deadline + kTimeTolerance) {
        throw InvariantError("task " + std::to_string(t.id) + " returned after its deadline");
      }
      transition(t, TaskStatus::Completed);
    }
    if (t.status == TaskStatus::Pending) {
      throw InvariantError("task " + std::to_string(t.id) + " left pending at episode end");
    }
    check_task(t);
    if (t.status == TaskStatus::Completed) ++result.num_completed;
    if (t.status == TaskStatus::Dropped) ++result.num_dropped;
  }
}

void drop(Task& task) { transition(task, TaskStatus::Dropped); }

}  // namespace

bool event_before(const EngineEvent& a, const EngineEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return a.kind == EventKind::MecFree;
  return a.payload < b.payload;
}

double EpisodeResult::total_decision_seconds() const {
  double total = 0.0;
  for (const auto& w : windows) total += w.decision_seconds;
  return total;
}

std::vector<std::int64_t> EpisodeResult::decision_sequence() const {
  std::vector<std::int64_t> seq;
  seq.reserve(windows.size());
  for (const auto& w : windows) seq.push_back(w.chosen_task);
  return seq;
}

std::pair<std::size_t, double> earliest_availability(std::span<const MecState> mecs) {
  if (mecs.empty()) throw std::invalid_argument("at least one MEC server is required");
  std::size_t best = 0;
  for (std::size_t j = 1; j < mecs.size(); ++j) {
    if (mecs[j].available_at < mecs[best].available_at) best = j;
  }
  return {best, mecs[best].available_at};
}

bool feasible_at(const Task& task, double start) {
  const double begin = std::max(start, task.arrival);
  const double wait = begin - task.arrival;
  const double comm = task.comm_time.value_or(0.0);
  return wait <= task.remaining_in_range - task.proc_time - comm + kTimeTolerance;
}

WindowBuild build_window(std::span<const Task> pending, double t_e_av, std::size_t index) {
  WindowBuild out;
  out.window.index = index;
  out.window.earliest_avail = t_e_av;
  for (const auto& t : pending) {
    if (t.arrival > t_e_av) continue;
    out.window.queued.push_back(t);
    if (feasible_at(t, t_e_av)) {
      out.window.feasible.push_back(t);
    } else {
      out.dropped.push_back(t.id);
    }
  }
  return out;
}

void assign(Task& task, MecState& server, double clock) {
  const double start = std::max({server.available_at, task.arrival, clock});
  if (!feasible_at(task, start)) {
    throw InvariantError("task " + std::to_string(task.id) + " assigned past its feasibility limit");
  }
  const double comm = task.comm_time.value_or(0.0);
  transition(task, TaskStatus::Assigned);
  task.start_proc = start;
  task.waiting = start - task.arrival;
  task.comp_latency = task.proc_time + *task.waiting;
  task.e2e_latency = *task.comp_latency + 2.0 * comm;
  task.comm_time = comm;
  task.assigned_mec = server.id;
  server.occupy(start, start + task.proc_time);
}

double charge_exec_time(double clock, double duration) {
  if (duration < 0.0) throw std::invalid_argument("execution time must be >= 0");
  return clock + duration;
}

EpisodeResult run_episode(std::vector<Task> tasks, Scheduler& scheduler, const SimConfig& cfg,
                          const ChannelParams& channel, const EngineOptions& options) {
  validate_config(cfg);
  validate_channel(channel);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    check_task(tasks[i]);
    if (tasks[i].status != TaskStatus::Pending) {
      throw std::invalid_argument("run_episode expects pending tasks");
    }
    if (i && tasks[i].arrival < tasks[i - 1].arrival) {
      throw std::invalid_argument("run_episode expects tasks sorted by arrival");
    }
  }

  EpisodeResult result;
  result.comm = assign_comm_times(tasks, channel);
  result.mecs = make_mecs(cfg.num_mecs);
  if (!options.initial_availability.empty()) {
    if (options.initial_availability.size() != cfg.num_mecs) {
      throw std::invalid_argument("initial_availability must have one entry per server");
    }
    for (std::size_t j = 0; j < cfg.num_mecs; ++j) {
      result.mecs[j].available_at = options.initial_availability[j];
    }
  }
  result.tasks = std::move(tasks);
  auto& all = result.tasks;
  auto& mecs = result.mecs;

  std::priority_queue<EngineEvent, std::vector<EngineEvent>, EventLater> events;
  for (std::size_t i = 0; i < all.size(); ++i) {
    events.push({EventKind::TaskArrival, all[i].arrival, static_cast<std::int64_t>(i)});
  }
  for (const auto& m : mecs) {
    if (m.available_at > 0.0) events.push({EventKind::MecFree, m.available_at, static_cast<std::int64_t>(m.id)});
  }

  std::vector<std::size_t> queue;  // indices into `all`, arrival order
  double now = 0.0;

  auto start_on = [&](std::size_t task_index, std::size_t server) {
    Task& task = all[task_index];
    const double start = std::max({mecs[server].available_at, task.arrival, now});
    if (!feasible_at(task, start)) {
      drop(task);
      return;
    }
    assign(task, mecs[server], now);
    events.push({EventKind::MecFree, mecs[server].available_at, static_cast<std::int64_t>(server)});
  };

  auto dispatch = [&] {
    while (!queue.empty()) {
      const auto [server, t_av] = earliest_availability(mecs);
      if (t_av > now) break;
      const double decision_time = std::max(t_av, now);

      std::vector<Task> pending;
      pending.reserve(queue.size());
      for (auto idx : queue) pending.push_back(all[idx]);
      auto built = build_window(pending, decision_time, result.windows.size());

      // Index of each queued task id, for removal.
      auto position_of = [&](std::int64_t id) {
        return std::find_if(queue.begin(), queue.end(),
                            [&](std::size_t idx) { return all[idx].id == id; });
      };
      for (auto id : built.dropped) {
        auto it = position_of(id);
        drop(all[*it]);
        queue.erase(it);
      }
      if (built.window.feasible.empty()) continue;

      const DecisionContext ctx{built.window, mecs, decision_time, cfg};
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t choice = scheduler.select(ctx);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (choice >= built.window.feasible.size()) {
        throw std::out_of_range(scheduler.name() + " selected index " + std::to_string(choice) +
                                " outside a window of " +
                                std::to_string(built.window.feasible.size()));
      }
      const double duration = options.synthetic_exec_cost.value_or(wall);
      if (cfg.charge_exec_time) now = charge_exec_time(now, duration);

      const auto chosen_id = built.window.feasible[choice].id;
      result.windows.push_back({built.window.index, built.window.queued.size(),
                                built.window.feasible.size(), duration, wall, chosen_id});
      auto it = position_of(chosen_id);
      const std::size_t task_index = *it;
      queue.erase(it);
      start_on(task_index, server);
    }
  };

  while (!events.empty()) {
    const EngineEvent ev = events.top();
    events.pop();
    now = std::max(now, ev.time);
    if (ev.kind == EventKind::TaskArrival) {
      const auto i = static_cast<std::size_t>(ev.payload);
      const auto [server, t_av] = earliest_availability(mecs);
      if (queue.empty() && t_av <= now) {
        start_on(i, server);
        continue;
      }
      queue.push_back(i);
    }
    dispatch();
  }
  // Only reachable with tasks still queued if no server ever frees, which the
  // MecFree events rule out; keep the accounting honest regardless.
  for (auto idx : queue) drop(all[idx]);

  finalize(result);
  scheduler.on_episode_end(result);
  return result;
}

ReplayStats replay_stats(std::span<const Task> tasks, std::span<const std::size_t> order,
                         std::span<double> availability, double not_before) {
  ReplayStats stats;
  for (auto idx : order) {
    const Task& t = tasks[idx];
    std::size_t best = 0;
    for (std::size_t j = 1; j < availability.size(); ++j) {
      if (availability[j] < availability[best]) best = j;
    }
    const double start = std::max({availability[best], t.arrival, not_before});
    const double comm = t.comm_time.value_or(0.0);
    if (start - t.arrival <= t.remaining_in_range - t.proc_time - comm + kTimeTolerance) {
      availability[best] = start + t.proc_time;
      stats.latency_sum += (start - t.arrival) + t.proc_time + 2.0 * comm;
      ++stats.assigned;
    } else {
      ++stats.dropped;
    }
  }
  return stats;
}

EpisodeResult execute_plan(std::vector<Task> tasks, std::span<const std::size_t> order,
                           const SimConfig& cfg, const ChannelParams& channel) {
  validate_config(cfg);
  if (order.size() != tasks.size()) throw std::invalid_argument("plan must order every task");
  std::vector<bool> seen(tasks.size(), false);
  for (auto idx : order) {
    if (idx >= tasks.size() || seen[idx]) throw std::invalid_argument("plan is not a permutation");
    seen[idx] = true;
  }
  EpisodeResult result;
  result.comm = assign_comm_times(tasks, channel);
  result.mecs = make_mecs(cfg.num_mecs);
  result.tasks = std::move(tasks);
  for (auto idx : order) {
    Task& t = result.tasks[idx];
    const auto [server, t_av] = earliest_availability(result.mecs);
    if (feasible_at(t, t_av)) {
      assign(t, result.mecs[server], t.arrival);
    } else {
      drop(t);
    }
  }
  finalize(result);
  return result;
}

void write_episode_dump(std::ostream& out, const EpisodeResult& result) {
  nlohmann::json header{{"type", "episode"},
                        {"num_tasks", result.num_tasks()},
                        {"num_mecs", result.num_mecs()},
                        {"num_dropped", result.num_dropped},
                        {"num_completed", result.num_completed}};
  out << header.dump() << '\n';
  for (const auto& t : result.tasks) {
    nlohmann::json j = t;
    j["type"] = "task";
    out << j.dump() << '\n';
  }
  for (const auto& w : result.windows) {
    nlohmann::json j{{"type", "window"},
                     {"y", w.index},
                     {"W", w.queued},
                     {"W_y", w.feasible},
                     {"decision_s", w.decision_seconds},
                     {"chosen_task", w.chosen_task}};
    out << j.dump() << '\n';
  }
}

void write_episode_dump(const std::filesystem::path& path, const EpisodeResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_episode_dump(out, result);
}

EpisodeResult read_episode_dump(std::istream& in) {
  EpisodeResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "episode") {
      result.mecs = make_mecs(j.at("num_mecs").get<std::size_t>());
    } else if (type == "task") {
      result.tasks.push_back(j.get<Task>());
    } else if (type == "window") {
      WindowRecord w;
      w.index = j.at("y").get<std::size_t>();
      w.queued = j.at("W").get<std::size_t>();
      w.feasible = j.at("W_y").get<std::size_t>();
      w.decision_seconds = j.at("decision_s").get<double>();
      w.wall_seconds = w.decision_seconds;
      w.chosen_task = j.at("chosen_task").get<std::int64_t>();
      result.windows.push_back(w);
    }
  }
  for (const auto& t : result.tasks) {
    if (t.status == TaskStatus::Completed) ++result.num_completed;
    if (t.status == TaskStatus::Dropped) ++result.num_dropped;
  }
  return result;
}

}  // namespace vecoff
