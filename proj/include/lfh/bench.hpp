#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lfh/controller.hpp"
#include "lfh/globalplan.hpp"
#include "lfh/pipeline.hpp"
#include "lfh/world.hpp"

namespace lfh {

// ---------------------------------------------------------------------------
// Courses

struct CourseParams {
  double resolution = 0.025;
  double straight_min = 0.8;  // straight section length range, meters
  double straight_max = 1.6;
  double turn_radius_min = 0.5;  // centerline radius of the 90 degree turns
  double turn_radius_max = 0.8;
  double lead = 0.5;    // extra free corridor behind the start and past the goal
  double margin = 0.5;  // solid border around the corridor
};

/// Serpentine corridor: `segments` straight sections joined by 90 degree arcs, alternating
/// between heading +x and a randomly chosen +-y. Cells whose centers lie farther than
/// passage / 2 from the centerline are solid, with passage = clearance_ratio * 2 * half_width.
/// Start and goal sit at the two ends of the centerline, which is written to `centerline`
/// when given.
Course generate_course(std::uint64_t seed, double clearance_ratio = 1.3, const Footprint& fp = {},
                       int segments = 7, const CourseParams& params = {},
                       std::vector<Point2>* centerline = nullptr);

// ---------------------------------------------------------------------------
// DWA baseline

struct DWAParams {
  double max_vel_x = 0.50;
  double max_vel_theta = 1.57;
  int vx_samples = 6;
  int vtheta_samples = 20;
  double occdist_scale = 0.10;
  double pdist_scale = 0.75;
  double gdist_scale = 1.00;
  double local_goal_dist = 1.0;

  void validate() const;
};

/// Velocity samples in evaluation order (v-major). omega = 0 is added to the omega set when
/// the evenly spaced samples straddle it without containing it.
std::vector<Control> dwa_samples(const DWAParams& params);

struct DwaDecision {
  Control control;
  bool stuck = false;  // every sample collided
  int sample = -1;     // index into dwa_samples, -1 when stuck
  double score = 0.0;
};

/// Scores one sample; nullopt when its rollout collides. Rollout, clearance and distances
/// follow dwa_plan.
std::optional<double> dwa_score(Control u, const Scan& scan, const Pose2D& pose, const SmoothPath& path,
                                const Pose2D& goal, const DWAParams& params, const Footprint& fp = {},
                                const SafetyConfig& safety = {});

/// Dynamic window sampling over the full velocity range. Each sample is rolled out as a
/// constant control over the MPC horizon; colliding samples are discarded and the rest scored
/// by occdist / min clearance to scan endpoints + pdist * distance of the final pose to the
/// path + gdist * distance of the final pose to the local goal. Lowest score wins, ties go to
/// the lowest sample index.
DwaDecision dwa_plan(const Scan& scan, const Pose2D& pose, const SmoothPath& path, const Pose2D& goal,
                     const DWAParams& params = {}, const Footprint& fp = {}, const SafetyConfig& safety = {});

// ---------------------------------------------------------------------------
// Trials

enum class Outcome { Success, Collision, Failure };
std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct TrialResult {
  Outcome outcome = Outcome::Failure;
  int collision_count = 0;
  double traversal_time = 0.0;  // seconds, +inf for Failure
  std::uint64_t seed = 0;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct LfhPlanner {
  MLPParams params;
  PipelineConfig config;
};

struct DwaPlanner {
  DWAParams params;
  PipelineConfig config;  // scan spec, footprint, safety horizon and global planner ladder
};

/// The LfH state machine around pure_pursuit_policy instead of the network.
struct ReferencePlanner {
  double lookahead = 0.3;
  double speed = 0.2;
  PipelineConfig config;
};

using PlannerChoice = std::variant<LfhPlanner, DwaPlanner, ReferencePlanner>;
std::string planner_name(const PlannerChoice& p);

struct TickRecord {
  int tick = 0;
  Pose2D pose;  // pose after applying `control`
  Control control;
  bool contact = false;
  bool stuck = false;
  const Diagnostics* diag = nullptr;  // LfH only
};

struct TrialOptions {
  double timeout = 200.0;
  double stuck_timeout = 10.0;
  double dt = kControlDt;
  std::function<void(const TickRecord&)> on_tick;
};

/// Simulates one run from the course start. A collision event is counted each time the
/// footprint goes from free to touching an obstacle. The goal is reached when the robot
/// center lies inside the footprint placed at the goal pose.
TrialResult run_trial(const Course& course, const PlannerChoice& planner, std::uint64_t seed,
                      const TrialOptions& options = {});

/// Trial i runs on courses[i % courses.size()] with seed base_seed + i. Trials are spread
/// over `threads` workers (0: hardware concurrency); options.on_tick is ignored. Results are
/// in trial order.
std::vector<TrialResult> run_trials(std::span<const Course> courses, const PlannerChoice& planner, int trials,
                                    std::uint64_t base_seed, const TrialOptions& options = {}, int threads = 0);

struct Report {
  int success = 0;
  int collision = 0;
  int failure = 0;
  double mean_time = 0.0;  // over Success and Collision trials, +inf when there are none
  double std_time = 0.0;   // population standard deviation
};

Report report(std::span<const TrialResult> trials);

/// CSV with columns planner, seed, outcome, collisions, time_s; rows sorted by seed.
std::string results_csv(const std::string& planner, std::span<const TrialResult> trials);
std::string report_table(const std::string& planner, const Report& r);

// ---------------------------------------------------------------------------
// Complexity

struct ComplexityReport {
  int n = 0;
  int x = 0;
  boost::multiprecision::cpp_int config_count;      // 2^(n^2)
  boost::multiprecision::cpp_int trajectory_count;  // x^n
  std::uint64_t enumerated_count = 0;
  bool exhaustive = true;  // every leaf visited, rather than subtree counts reused per depth
};

/// Depth-first enumeration of all length-n branch sequences with x choices per step.
/// Requires 1 <= n <= 20 and 2 <= x <= 4. Leaves are visited one by one while x^n is at
/// most `leaf_budget`; beyond that each depth's subtree is counted once and reused.
ComplexityReport complexity_enumerate(int n, int x, std::uint64_t leaf_budget = 1ULL << 26);

}  // namespace lfh
