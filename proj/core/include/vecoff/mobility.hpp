#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/domain.hpp"

namespace vecoff {

/// One floating-car-data row.
struct TraceSample {
  double time = 0.0;
  std::int64_t vehicle_id = 0;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  bool operator==(const TraceSample&) const = default;
};

using Trace = std::vector<TraceSample>;

/// Straight highway along +x with a single RSU.
struct ScenarioGeometry {
  double rsu_x = 500.0;
  double rsu_y = 0.0;
  double coverage_radius = 250.0;
  double road_length = 1000.0;
  int lanes = 3;
  double lane_width = 3.5;
  std::pair<double, double> speed_range{20.0, 30.0};
  // Vehicles are inserted at x = 0 uniformly over [0, depart_horizon] seconds.
  double depart_horizon = 2.0;
  bool operator==(const ScenarioGeometry&) const = default;
};

using Resolution = std::pair<int, int>;  // width, height in pixels

struct WorkloadModel {
  double poisson_rate = 0.1;  // tasks per second per vehicle
  std::vector<Resolution> resolutions{{224, 224}, {640, 480}, {1280, 720}};
  int bits_per_pixel = 24;
  std::map<Resolution, double> proc_time_table{
      {{224, 224}, 0.05}, {{640, 480}, 0.15}, {{1280, 720}, 0.40}};
  bool operator==(const WorkloadModel&) const = default;
};

void validate_geometry(const ScenarioGeometry& geom);
void validate_workload(const WorkloadModel& workload);

/// Error while reading a trace file; line() is 1-based (0 when not line specific).
class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Constant-speed vehicles entering at x = 0, sampled at 1 Hz while x < road_length.
/// Output is ordered by (time, vehicle_id).
Trace generate_trace(const ScenarioGeometry& geom, std::size_t n_vehicles, std::uint64_t seed);

/// Reads a `time,vehicle_id,x,y,speed` CSV.
Trace ingest_trace(const std::filesystem::path& path);
Trace parse_trace(std::istream& in);

void write_trace(std::ostream& out, std::span<const TraceSample> trace);
void write_trace(const std::filesystem::path& path, std::span<const TraceSample> trace);

/// Samples grouped per vehicle, each group sorted by time.
std::map<std::int64_t, Trace> split_by_vehicle(std::span<const TraceSample> trace);

struct Interval {
  double begin = 0.0;
  double end = 0.0;
};

/// Time intervals during which the vehicle is within coverage. Positions are
/// linearly interpolated between samples, crossings solved exactly per segment.
std::vector<Interval> coverage_intervals(std::span<const TraceSample> vehicle_samples,
                                         const ScenarioGeometry& geom);

struct DeadlineInfo {
  double deadline = 0.0;
  double remaining_in_range = 0.0;
};

/// Deadline of a task that reaches the RSU at `arrival`. Throws std::invalid_argument
/// when the vehicle never enters coverage.
DeadlineInfo deadline_of(double arrival, std::span<const TraceSample> vehicle_samples,
                         const ScenarioGeometry& geom);

struct SpawnResult {
  std::vector<Task> tasks;  // sorted by arrival, ids assigned in that order
  std::vector<std::int64_t> vehicles_never_in_range;
};

SpawnResult spawn_tasks(std::span<const TraceSample> trace, const WorkloadModel& workload,
                        const ScenarioGeometry& geom, std::size_t tasks_per_vehicle,
                        std::uint64_t seed);

void to_json(nlohmann::json& j, const ScenarioGeometry& g);
void from_json(const nlohmann::json& j, ScenarioGeometry& g);
void to_json(nlohmann::json& j, const WorkloadModel& w);
void from_json(const nlohmann::json& j, WorkloadModel& w);

}  // namespace vecoff
