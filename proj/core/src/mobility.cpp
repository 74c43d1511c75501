#include "vecoff/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "text_util.hpp"

namespace vecoff {

namespace {

constexpr const char* kTraceHeader = "time,vehicle_id,x,y,speed";

std::string resolution_key(const Resolution& r) {
  return std::to_string(r.first) + "x" + std::to_string(r.second);
}

Resolution parse_resolution_key(const std::string& key) {
  auto parts = detail::split(key, 'x');
  if (parts.size() != 2) throw std::invalid_argument("bad resolution key '" + key + "'");
  auto w = detail::parse_int<int>(parts[0]);
  auto h = detail::parse_int<int>(parts[1]);
  if (!w || !h) throw std::invalid_argument("bad resolution key '" + key + "'");
  return {*w, *h};
}

// Sub-interval of [0, 1] where |p0 + s (p1 - p0) - c|^2 <= r^2.
std::optional<std::pair<double, double>> inside_fraction(double x0, double y0, double x1,
                                                          double y1, double cx, double cy,
                                                          double r) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double fx = x0 - cx;
  const double fy = y0 - cy;
  const double a = dx * dx + dy * dy;
  const double b = 2.0 * (fx * dx + fy * dy);
  const double c = fx * fx + fy * fy - r * r;
  if (a == 0.0) {
    if (c <= 0.0) return std::pair{0.0, 1.0};
    return std::nullopt;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (b + std::copysign(sq, b));
  double s1 = q / a;
  double s2 = q != 0.0 ? c / q : s1;
  if (s1 > s2) std::swap(s1, s2);
  const double lo = std::max(0.0, s1);
  const double hi = std::min(1.0, s2);
  if (lo > hi) return std::nullopt;
  return std::pair{lo, hi};
}

}  // namespace

TraceFormatError::TraceFormatError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

void validate_geometry(const ScenarioGeometry& geom) {
  std::vector<std::string> problems;
  if (!(geom.coverage_radius > 0.0)) problems.emplace_back("coverage_radius must be > 0");
  if (!(geom.road_length > 0.0)) problems.emplace_back("road_length must be > 0");
  if (geom.lanes < 1) problems.emplace_back("lanes must be >= 1");
  if (!(geom.speed_range.first > 0.0)) problems.emplace_back("speed_range.min must be > 0");
  if (geom.speed_range.second < geom.speed_range.first) {
    problems.emplace_back("speed_range.max must be >= speed_range.min");
  }
  if (geom.depart_horizon < 0.0) problems.emplace_back("depart_horizon must be >= 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

void validate_workload(const WorkloadModel& workload) {
  std::vector<std::string> problems;
  if (!(workload.poisson_rate > 0.0)) problems.emplace_back("poisson_rate must be > 0");
  if (workload.resolutions.empty()) problems.emplace_back("resolutions must not be empty");
  if (workload.bits_per_pixel <= 0) problems.emplace_back("bits_per_pixel must be > 0");
  for (const auto& r : workload.resolutions) {
    auto it = workload.proc_time_table.find(r);
    if (it == workload.proc_time_table.end()) {
      problems.push_back("proc_time_table has no entry for " + resolution_key(r));
    } else if (!(it->second > 0.0)) {
      problems.push_back("proc_time for " + resolution_key(r) + " must be > 0");
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

Trace generate_trace(const ScenarioGeometry& geom, std::size_t n_vehicles, std::uint64_t seed) {
  validate_geometry(geom);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed_dist(geom.speed_range.first, geom.speed_range.second);
  std::uniform_real_distribution<double> depart_dist(0.0, geom.depart_horizon);
  std::uniform_int_distribution<int> lane_dist(0, geom.lanes - 1);

  Trace trace;
  for (std::size_t v = 0; v < n_vehicles; ++v) {
    const double speed = speed_dist(rng);
    const double depart = geom.depart_horizon > 0.0 ? depart_dist(rng) : 0.0;
    const int lane = lane_dist(rng);
    const double y = (lane + 0.5) * geom.lane_width;
    for (std::int64_t k = 0;; ++k) {
      const double x = speed * static_cast<double>(k);
      if (x >= geom.road_length) break;
      trace.push_back({depart + static_cast<double>(k), static_cast<std::int64_t>(v), x, y, speed});
    }
  }
  std::stable_sort(trace.begin(), trace.end(), [](const TraceSample& a, const TraceSample& b) {
    return a.time != b.time ? a.time < b.time : a.vehicle_id < b.vehicle_id;
  });
  return trace;
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::map<std::int64_t, double> last_time;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != kTraceHeader) {
        throw TraceFormatError(line_no, "expected header '" + std::string(kTraceHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    auto fields = detail::split(text, ',');
    if (fields.size() != 5) {
      throw TraceFormatError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    auto time = detail::parse_double(fields[0]);
    auto vid = detail::parse_int<std::int64_t>(fields[1]);
    auto x = detail::parse_double(fields[2]);
    auto y = detail::parse_double(fields[3]);
    auto speed = detail::parse_double(fields[4]);
    if (!time || !vid || !x || !y || !speed) throw TraceFormatError(line_no, "malformed number");
    if (!std::isfinite(*time) || !std::isfinite(*x) || !std::isfinite(*y) || !std::isfinite(*speed)) {
      throw TraceFormatError(line_no, "non-finite value");
    }
    if (*speed < 0.0) throw TraceFormatError(line_no, "negative speed");
    auto [it, fresh] = last_time.try_emplace(*vid, *time);
    if (!fresh) {
      if (!(*time > it->second)) {
        throw TraceFormatError(line_no, "time not increasing for vehicle " + std::to_string(*vid));
      }
      it->second = *time;
    }
    trace.push_back({*time, *vid, *x, *y, *speed});
  }
  return trace;
}

Trace ingest_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError(0, "cannot open " + path.string());
  return parse_trace(in);
}

void write_trace(std::ostream& out, std::span<const TraceSample> trace) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace) {
    out << detail::format_double(s.time) << ',' << s.vehicle_id << ',' << detail::format_double(s.x)
        << ',' << detail::format_double(s.y) << ',' << detail::format_double(s.speed) << '\n';
  }
}

void write_trace(const std::filesystem::path& path, std::span<const TraceSample> trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace(out, trace);
}

std::map<std::int64_t, Trace> split_by_vehicle(std::span<const TraceSample> trace) {
  std::map<std::int64_t, Trace> out;
  for (const auto& s : trace) out[s.vehicle_id].push_back(s);
  for (auto& [id, samples] : out) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const TraceSample& a, const TraceSample& b) { return a.time < b.time; });
  }
  return out;
}

std::vector<Interval> coverage_intervals(std::span<const TraceSample> samples,
                                         const ScenarioGeometry& geom) {
  std::vector<Interval> out;
  auto push = [&](double begin, double end) {
    if (!out.empty() && begin <= out.back().end + kTimeTolerance) {
      out.back().end = std::max(out.back().end, end);
    } else {
      out.push_back({begin, end});
    }
  };
  if (samples.empty()) return out;
  if (samples.size() == 1) {
    const auto& s = samples.front();
    const double dx = s.x - geom.rsu_x;
    const double dy = s.y - geom.rsu_y;
    if (dx * dx + dy * dy <= geom.coverage_radius * geom.coverage_radius) push(s.time, s.time);
    return out;
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    auto frac = inside_fraction(a.x, a.y, b.x, b.y, geom.rsu_x, geom.rsu_y, geom.coverage_radius);
    if (!frac) continue;
    const double dt = b.time - a.time;
    push(a.time + frac->first * dt, a.time + frac->second * dt);
  }
  return out;
}

DeadlineInfo deadline_of(double arrival, std::span<const TraceSample> vehicle_samples,
                         const ScenarioGeometry& geom) {
  const auto intervals = coverage_intervals(vehicle_samples, geom);
  if (intervals.empty()) throw std::invalid_argument("vehicle never enters RSU coverage");
  for (const auto& iv : intervals) {
    if (arrival >= iv.begin - kTimeTolerance && arrival <= iv.end) {
      const double remaining = std::max(0.0, iv.end - arrival);
      return {arrival + remaining, remaining};
    }
  }
  return {arrival, 0.0};
}

SpawnResult spawn_tasks(std::span<const TraceSample> trace, const WorkloadModel& workload,
                        const ScenarioGeometry& geom, std::size_t tasks_per_vehicle,
                        std::uint64_t seed) {
  validate_workload(workload);
  if (trace.empty()) throw std::invalid_argument("spawn_tasks needs a non-empty trace");

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap_dist(workload.poisson_rate);
  std::uniform_int_distribution<std::size_t> res_dist(0, workload.resolutions.size() - 1);

  SpawnResult result;
  for (const auto& [vid, samples] : split_by_vehicle(trace)) {
    // Draws happen whether or not the vehicle is covered so the stream stays aligned.
    std::vector<std::pair<double, Resolution>> draws;
    double gen = samples.front().time;
    for (std::size_t k = 0; k < tasks_per_vehicle; ++k) {
      gen += gap_dist(rng);
      draws.emplace_back(gen, workload.resolutions[res_dist(rng)]);
    }
    const auto intervals = coverage_intervals(samples, geom);
    if (intervals.empty()) {
      result.vehicles_never_in_range.push_back(vid);
      continue;
    }
    const auto& range = intervals.front();
    for (const auto& [generated, res] : draws) {
      Task t;
      t.vehicle_id = vid;
      t.arrival = std::clamp(generated, range.begin, range.end);
      const auto dl = deadline_of(t.arrival, samples, geom);
      t.deadline = dl.deadline;
      t.remaining_in_range = dl.remaining_in_range;
      t.size = static_cast<double>(res.first) * res.second * workload.bits_per_pixel;
      t.proc_time = workload.proc_time_table.at(res);
      result.tasks.push_back(t);
    }
  }
  std::stable_sort(result.tasks.begin(), result.tasks.end(), [](const Task& a, const Task& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.vehicle_id < b.vehicle_id;
  });
  for (std::size_t i = 0; i < result.tasks.size(); ++i) {
    result.tasks[i].id = static_cast<std::int64_t>(i);
  }
  return result;
}

void to_json(nlohmann::json& j, const ScenarioGeometry& g) {
  j = nlohmann::json{{"rsu_x", g.rsu_x},
                     {"rsu_y", g.rsu_y},
                     {"coverage_radius", g.coverage_radius},
                     {"road_length", g.road_length},
                     {"lanes", g.lanes},
                     {"lane_width", g.lane_width},
                     {"speed_range", {g.speed_range.first, g.speed_range.second}},
                     {"depart_horizon", g.depart_horizon}};
}

void from_json(const nlohmann::json& j, ScenarioGeometry& g) {
  const ScenarioGeometry d;
  g.rsu_x = j.value("rsu_x", d.rsu_x);
  g.rsu_y = j.value("rsu_y", d.rsu_y);
  g.coverage_radius = j.value("coverage_radius", d.coverage_radius);
  g.road_length = j.value("road_length", d.road_length);
  g.lanes = j.value("lanes", d.lanes);
  g.lane_width = j.value("lane_width", d.lane_width);
  if (auto it = j.find("speed_range"); it != j.end()) {
    g.speed_range = {it->at(0).get<double>(), it->at(1).get<double>()};
  } else {
    g.speed_range = d.speed_range;
  }
  g.depart_horizon = j.value("depart_horizon", d.depart_horizon);
}

void to_json(nlohmann::json& j, const WorkloadModel& w) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [res, t] : w.proc_time_table) table[resolution_key(res)] = t;
  nlohmann::json res = nlohmann::json::array();
  for (const auto& r : w.resolutions) res.push_back({r.first, r.second});
  j = nlohmann::json{{"poisson_rate", w.poisson_rate},
                     {"resolutions", res},
                     {"bits_per_pixel", w.bits_per_pixel},
                     {"proc_time_table", table}};
}

void from_json(const nlohmann::json& j, WorkloadModel& w) {
  const WorkloadModel d;
  w.poisson_rate = j.value("poisson_rate", d.poisson_rate);
  w.bits_per_pixel = j.value("bits_per_pixel", d.bits_per_pixel);
  if (auto it = j.find("resolutions"); it != j.end()) {
    w.resolutions.clear();
    for (const auto& r : *it) w.resolutions.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
  } else {
    w.resolutions = d.resolutions;
  }
  if (auto it = j.find("proc_time_table"); it != j.end()) {
    w.proc_time_table.clear();
    for (const auto& [key, value] : it->items()) {
      w.proc_time_table[parse_resolution_key(key)] = value.get<double>();
    }
  } else {
    w.proc_time_table = d.proc_time_table;
  }
}

}  // namespace vecoff
