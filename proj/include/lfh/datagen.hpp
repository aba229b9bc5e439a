#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfh/geometry.hpp"
#include "lfh/hallucination.hpp"
#include "lfh/kinematics.hpp"
#include "lfh/lidar.hpp"

namespace lfh {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Normalization shared by the dataset and the learned controller.

inline double normalize_range(double r, const ScanSpec& spec) {
  return std::clamp(r, 0.0, spec.max_range) / spec.max_range - 0.5;
}
inline double denormalize_range(double x, const ScanSpec& spec) { return (x + 0.5) * spec.max_range; }
inline double normalize_v(double v, const Limits& lim) { return v / lim.v_max; }
inline double denormalize_v(double x, const Limits& lim) { return x * lim.v_max; }
inline double normalize_omega(double w, const Limits& lim) { return w / lim.omega_max; }
inline double denormalize_omega(double x, const Limits& lim) { return x * lim.omega_max; }

// ---------------------------------------------------------------------------
// Random exploration.

struct RandomWalkConfig {
  double sigma_v = 0.05;      // m/s per step
  double sigma_omega = 0.25;  // rad/s per step
  Limits limits;
  int hold_steps = 1;  // each drawn control is held this many steps
};

/// One step of a clamped Gaussian random walk in (v, omega).
Control random_policy(Rng& rng, Control previous, const RandomWalkConfig& cfg = {});

using Policy = std::function<Control(Rng&, const Control& previous)>;

/// Stateful: a new control is drawn on the first call and then every hold_steps calls,
/// otherwise the previous control is repeated.
Policy random_walk_policy(RandomWalkConfig cfg = {});

struct LogEntry {
  Pose2D pose;
  Control control;  // applied from `pose` for one dt
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct TrajectoryLog {
  double dt = kControlDt;
  std::vector<LogEntry> entries;
  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

/// Drives the policy in obstacle-free space from the origin for floor(duration / dt) steps.
TrajectoryLog collect(double duration, double dt, const Policy& policy, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Hallucinated dataset.

enum class WindowMode { Forward, Centered };

struct DatasetParams {
  ScanSpec spec;
  Limits limits;
  int window = 100;
  double goal_dist = 1.0;
  double offset = kCorridorOffset;
  WindowMode window_mode = WindowMode::Forward;
  bool mirror = false;     // also add each sample reflected about the robot's x axis
  std::uint64_t seed = 0;  // recorded only; generation is deterministic
  double dt = kControlDt;
  friend bool operator==(const DatasetParams&, const DatasetParams&) = default;
};

/// All values are normalized: scan to [-0.5, 0.5], v to [0, 1], omega to [-1, 1], goal
/// coordinates divided by the goal distance.
struct TrainingSample {
  std::vector<double> scan;
  double v = 0.0;
  double omega = 0.0;
  Point2 goal;
  double label_v = 0.0;
  double label_omega = 0.0;
  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

struct Dataset {
  DatasetParams meta;
  std::vector<TrainingSample> samples;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reflection about the robot's x axis: beam at angle a takes the value of the beam nearest
/// to -a, and omega and goal.y change sign.
TrainingSample mirrored(const TrainingSample& s, const ScanSpec& spec);

/// Centerline used for sample `index`, expressed in the frame of the pose at `index`, with
/// repeated points removed. Stationary windows get a short stub along the heading.
std::vector<Point2> window_centerline(const TrajectoryLog& log, std::size_t index, const DatasetParams& params);

/// First centerline point at arc length >= dist (the last point when the line is shorter).
Point2 goal_along(std::span<const Point2> centerline, double dist);

/// Hallucinates one training sample per index i with i + window + 1 < log length.
Dataset build_dataset(const TrajectoryLog& log, const DatasetParams& params = {});

/// Number of samples build_dataset produces for a log of `length` entries.
std::size_t dataset_size(std::size_t length, int window);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// JSON Lines: a meta object followed by one object per sample.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// JSON Lines log: one {"pose":[x,y,psi],"control":[v,w]} object per line after a {"dt":...} header.
void save_log(const TrajectoryLog& log, const std::filesystem::path& path);
TrajectoryLog load_log(const std::filesystem::path& path);

}  // namespace lfh
