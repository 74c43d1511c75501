#include "vecoff/domain.hpp"

#include <cmath>
#include <sstream>

namespace vecoff {

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << '\n';
    out << items[i];
  }
  return out.str();
}

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <class T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

const char* to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Assigned: return "assigned";
    case TaskStatus::Completed: return "completed";
    case TaskStatus::Dropped: return "dropped";
  }
  return "unknown";
}

TaskStatus task_status_from_string(const std::string& text) {
  if (text == "pending") return TaskStatus::Pending;
  if (text == "assigned") return TaskStatus::Assigned;
  if (text == "completed") return TaskStatus::Completed;
  if (text == "dropped") return TaskStatus::Dropped;
  throw std::invalid_argument("unknown task status '" + text + "'");
}

double Task::return_time() const {
  if (!start_proc || !comm_time) {
    throw InvariantError("task " + std::to_string(id) + " has no schedule yet");
  }
  return *start_proc + proc_time + *comm_time;
}

void check_task(const Task& task) {
  const auto where = "task " + std::to_string(task.id) + ": ";
  if (!(task.size > 0.0)) throw InvariantError(where + "size must be > 0");
  if (!(task.proc_time > 0.0)) throw InvariantError(where + "proc_time must be > 0");
  if (!(task.arrival >= 0.0)) throw InvariantError(where + "arrival must be >= 0");
  if (task.remaining_in_range < 0.0) throw InvariantError(where + "remaining_in_range must be >= 0");
  if (std::abs(task.deadline - (task.arrival + task.remaining_in_range)) >
      kTimeTolerance * std::max(1.0, std::abs(task.deadline))) {
    throw InvariantError(where + "deadline != arrival + remaining_in_range");
  }
  if (task.status == TaskStatus::Completed) {
    if (!task.start_proc || !task.waiting || !task.comp_latency || !task.e2e_latency ||
        !task.assigned_mec) {
      throw InvariantError(where + "completed task is missing schedule fields");
    }
    if (*task.waiting < -kTimeTolerance ||
        std::abs(*task.waiting - (*task.start_proc - task.arrival)) > kTimeTolerance) {
      throw InvariantError(where + "waiting must equal start_proc - arrival and be >= 0");
    }
  }
  if (task.status == TaskStatus::Dropped && task.assigned_mec) {
    throw InvariantError(where + "dropped task cannot hold a server assignment");
  }
}

void transition(Task& task, TaskStatus next) {
  const bool ok = (task.status == TaskStatus::Pending &&
                   (next == TaskStatus::Assigned || next == TaskStatus::Dropped)) ||
                  (task.status == TaskStatus::Assigned && next == TaskStatus::Completed);
  if (!ok) {
    throw InvariantError("task " + std::to_string(task.id) + ": illegal transition " +
                         to_string(task.status) + " -> " + to_string(next));
  }
  task.status = next;
}

void MecState::occupy(double start, double end) {
  if (end < start) throw InvariantError("busy interval ends before it starts");
  if (!busy_intervals.empty() && start < busy_intervals.back().end - kTimeTolerance) {
    throw InvariantError("server " + std::to_string(id) + ": overlapping busy interval");
  }
  busy_intervals.push_back({start, end});
  available_at = end;
}

std::vector<MecState> make_mecs(std::size_t count) {
  std::vector<MecState> mecs(count);
  for (std::size_t j = 0; j < count; ++j) mecs[j].id = j;
  return mecs;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join_lines(problems)), problems_(std::move(problems)) {}

SimConfig validate_config(const SimConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.num_mecs < 1) problems.emplace_back("num_mecs must be >= 1");
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) problems.emplace_back("lambda out of [0,1]");
  if (cfg.window_cap < 1) problems.emplace_back("window_cap must be >= 1");
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ChannelParams validate_channel(const ChannelParams& ch) {
  std::vector<std::string> problems;
  if (!(ch.bandwidth_max > 0.0)) problems.emplace_back("bandwidth_max must be > 0");
  if (!(ch.tx_power > 0.0)) problems.emplace_back("tx_power must be > 0");
  if (!(ch.channel_gain > 0.0)) problems.emplace_back("channel_gain must be > 0");
  if (!(ch.noise_density > 0.0)) problems.emplace_back("noise_density must be > 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return ch;
}

void to_json(nlohmann::json& j, const Task& t) {
  j = nlohmann::json{{"id", t.id},
                     {"vehicle_id", t.vehicle_id},
                     {"arrival", t.arrival},
                     {"size", t.size},
                     {"proc_time", t.proc_time},
                     {"deadline", t.deadline},
                     {"remaining_in_range", t.remaining_in_range},
                     {"status", to_string(t.status)}};
  put_optional(j, "start_proc", t.start_proc);
  put_optional(j, "waiting", t.waiting);
  put_optional(j, "comm_time", t.comm_time);
  put_optional(j, "comp_latency", t.comp_latency);
  put_optional(j, "e2e_latency", t.e2e_latency);
  put_optional(j, "assigned_mec", t.assigned_mec);
}

void from_json(const nlohmann::json& j, Task& t) {
  t.id = j.at("id").get<std::int64_t>();
  t.vehicle_id = j.at("vehicle_id").get<std::int64_t>();
  t.arrival = j.at("arrival").get<double>();
  t.size = j.at("size").get<double>();
  t.proc_time = j.at("proc_time").get<double>();
  t.deadline = j.at("deadline").get<double>();
  t.remaining_in_range = j.at("remaining_in_range").get<double>();
  t.status = task_status_from_string(j.value("status", std::string{"pending"}));
  t.start_proc = get_optional<double>(j, "start_proc");
  t.waiting = get_optional<double>(j, "waiting");
  t.comm_time = get_optional<double>(j, "comm_time");
  t.comp_latency = get_optional<double>(j, "comp_latency");
  t.e2e_latency = get_optional<double>(j, "e2e_latency");
  t.assigned_mec = get_optional<std::size_t>(j, "assigned_mec");
}

void to_json(nlohmann::json& j, const BusyInterval& b) { j = nlohmann::json::array({b.start, b.end}); }

void from_json(const nlohmann::json& j, BusyInterval& b) {
  b.start = j.at(0).get<double>();
  b.end = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const MecState& m) {
  j = nlohmann::json{{"id", m.id}, {"available_at", m.available_at}, {"busy_intervals", m.busy_intervals}};
}

void from_json(const nlohmann::json& j, MecState& m) {
  m.id = j.at("id").get<std::size_t>();
  m.available_at = j.at("available_at").get<double>();
  m.busy_intervals = j.value("busy_intervals", std::vector<BusyInterval>{});
}

void to_json(nlohmann::json& j, const ChannelParams& c) {
  j = nlohmann::json{{"bandwidth_max", c.bandwidth_max},
                     {"tx_power", c.tx_power},
                     {"channel_gain", c.channel_gain},
                     {"noise_density", c.noise_density}};
}

void from_json(const nlohmann::json& j, ChannelParams& c) {
  const ChannelParams d;
  c.bandwidth_max = j.value("bandwidth_max", d.bandwidth_max);
  c.tx_power = j.value("tx_power", d.tx_power);
  c.channel_gain = j.value("channel_gain", d.channel_gain);
  c.noise_density = j.value("noise_density", d.noise_density);
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"num_mecs", c.num_mecs},
                     {"lambda", c.lambda},
                     {"num_vehicles", c.num_vehicles},
                     {"tasks_per_vehicle", c.tasks_per_vehicle},
                     {"rng_seed", c.rng_seed},
                     {"window_cap", c.window_cap},
                     {"charge_exec_time", c.charge_exec_time}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  const SimConfig d;
  c.num_mecs = j.value("num_mecs", d.num_mecs);
  c.lambda = j.value("lambda", d.lambda);
  c.num_vehicles = j.value("num_vehicles", d.num_vehicles);
  c.tasks_per_vehicle = j.value("tasks_per_vehicle", d.tasks_per_vehicle);
  c.rng_seed = j.value("rng_seed", d.rng_seed);
  c.window_cap = j.value("window_cap", d.window_cap);
  c.charge_exec_time = j.value("charge_exec_time", d.charge_exec_time);
}

}  // namespace vecoff
