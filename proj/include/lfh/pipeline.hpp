#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfh/controller.hpp"
#include "lfh/globalplan.hpp"
#include "lfh/hallucination.hpp"
#include "lfh/kinematics.hpp"
#include "lfh/lidar.hpp"
#include "lfh/world.hpp"

namespace lfh {

/// Constants of the deployment safety layer.
struct SafetyConfig {
  double noise_frac = 0.10;   // std of the control noise relative to each component
  double noise_floor = 0.01;  // lower bound of that std, so zero controls are perturbed too
  int samples = 32;
  int horizon = 20;
  double mpc_dt = kControlDt;
  int perimeter_points = 40;
  double w1 = 0.4;
  double w2 = 1.0;
  double omega_deadband = 0.04;
  double heading_threshold = kPi / 6.0;
  double pid_gain = 1.0;
  int recovery_iters = 20;
  double recovery_rate = 0.02;
  double backup_v = 0.1;

  void validate() const;
};

/// Points evenly spread over the footprint outline (one corner plus interior points per
/// edge), in the robot frame.
std::vector<Point2> perimeter_points(const Footprint& fp, int count = 40);

/// Rolls the plan out from the scan origin and reports a collision when any perimeter point
/// of any pose after the start reaches or passes the reading of its beam.
bool collision_check(const Plan& plan, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg = {});

/// Fraction of noise-perturbed constant-control rollouts that pass collision_check.
/// Sample j draws from its own generator seeded from (seed, j).
double estimate_safety(Control u, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg,
                       std::uint64_t seed);

/// e^(w1 - w2 (1 - p_safe)).
double modulation_factor(double p_safe, const SafetyConfig& cfg = {});

/// Zeroes small omega, scales both components by modulation_factor and clamps to `limits`.
Control modulate(Control u, double p_safe, const SafetyConfig& cfg = {}, const Limits& limits = {});

struct RecoveryResult {
  Control control;
  int stage = 3;      // 1, 2 or 3
  int iteration = 0;  // 1-based within stages 1 and 2
};

/// Three-stage fallback for a control that failed collision_check. Candidates are checked as
/// constant controls over the MPC horizon; stage 3 (reverse at backup_v) is not checked.
/// Throws std::invalid_argument when `u` itself passes collision_check.
RecoveryResult recovery(Control u, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg = {});

/// In-place rotation with a proportional heading controller.
Control pid_turn(double heading_error, const SafetyConfig& cfg = {});

enum class Mode { TurnInPlace, LfH, Recovery };
std::string to_string(Mode m);

struct FsmState {
  Mode mode = Mode::LfH;
  int recovery_stage = 0;  // 1..3 while in Recovery, 0 otherwise
  friend bool operator==(const FsmState&, const FsmState&) = default;
};

struct Diagnostics {
  Mode mode = Mode::LfH;
  int recovery_stage = 0;
  double p_safety = 1.0;
  double tangent_error = 0.0;
  double modulation = 1.0;
  Control learned;    // raw network output (LfH mode)
  Control candidate;  // control before the final collision check
  Point2 local_goal;
  bool hallucinated = false;  // false when the pose fell outside the path corridor
  double inflation = 0.0;     // inflation radius the global plan succeeded with
  std::vector<Point2> global_path;
  Scan real_scan;
  Scan input_scan;
  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

struct PipelineConfig {
  SafetyConfig safety;
  Limits limits;
  ScanSpec spec;
  Footprint footprint;
  double goal_dist = 1.0;
  double corridor_offset = kCorridorOffset;
  /// Arc length of smoothed path ahead of the robot that is hallucinated.
  double corridor_length = 2.0;
  /// Arc length hallucinated behind the robot (0 for forward-window models).
  double corridor_behind = 0.0;
  /// Inflation radii tried in order until the global planner finds a path.
  std::vector<double> inflation_ladder{0.165, 0.1, 0.0};
  /// Keeps global paths near the middle of passages.
  ClearanceCost clearance{2.0, 0.5};
};

/// What the local policy sees on an LfH tick.
struct PolicyInput {
  const Scan* scan = nullptr;  // hallucinated-and-real minimum, or the real scan
  Control current;
  Point2 local_goal;  // robot frame
  const SmoothPath* path = nullptr;
  Pose2D pose;
};

using LocalPolicy = std::function<Control(const PolicyInput&)>;

/// The learned planner: predict() on scan, current control and local goal.
LocalPolicy mlp_policy(MLPParams params, Limits limits = {}, double goal_dist = 1.0);

/// Hand-written reference: constant speed, curvature towards the path point `lookahead`
/// meters ahead. Used to tell policy failures from course or safety-layer failures.
LocalPolicy pure_pursuit_policy(double lookahead = 0.3, double speed = 0.2, Limits limits = {});

struct TickResult {
  Control control;
  FsmState state;
  Diagnostics diag;
};

/// The learned local planner wrapped in its deployment state machine. Holds read-only
/// references to the map and model; ticks are pure functions of their arguments.
class LfhPipeline {
 public:
  /// Throws std::invalid_argument when the model input does not match the scan spec.
  LfhPipeline(const OccupancyGrid& grid, MLPParams params, PipelineConfig cfg = {});
  /// Same state machine around any local policy.
  LfhPipeline(const OccupancyGrid& grid, LocalPolicy policy, PipelineConfig cfg = {});

  const PipelineConfig& config() const { return cfg_; }

  /// Global plan from `pose` to `goal` through the first inflation level that admits one,
  /// then artificial waypoints and smoothing. Throws NoPathError when no level works.
  GlobalPlanner::Result global_path(const Pose2D& pose, const Pose2D& goal) const;

  /// One control tick: sense, plan globally, pre-process, infer, estimate safety, modulate,
  /// recover. Throws NoPathError when the goal is unreachable.
  TickResult tick(const Pose2D& pose, const Pose2D& goal, Control prev, const FsmState& state,
                  std::uint64_t seed) const;

 private:
  const OccupancyGrid* grid_;
  LocalPolicy policy_;
  PipelineConfig cfg_;
  GlobalPlanner planner_;
};

/// Free-function form of LfhPipeline::tick.
TickResult fsm_step(const LfhPipeline& pipeline, const Pose2D& pose, const Pose2D& goal, Control prev,
                    const FsmState& state, std::uint64_t seed);

/// splitmix64 mix of a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lfh
