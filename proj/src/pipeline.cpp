#include "lfh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace lfh {

void SafetyConfig::validate() const {
  if (!(noise_frac > 0.0) || !(noise_floor > 0.0) || samples < 1 || horizon < 1 || !(mpc_dt > 0.0) ||
      perimeter_points < 4 || perimeter_points % 4 != 0 || !(w2 > 0.0) || !(omega_deadband > 0.0) ||
      !(heading_threshold > 0.0) || !(pid_gain > 0.0) || recovery_iters < 1 || !(recovery_rate > 0.0) ||
      !(backup_v > 0.0)) {
    throw std::invalid_argument("invalid safety configuration");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Point2> perimeter_points(const Footprint& fp, int count) {
  if (count < 4 || count % 4 != 0) throw std::invalid_argument("perimeter point count must be a multiple of 4");
  const int per_edge = count / 4;
  const double hl = fp.half_length(), hw = fp.half_width;
  const Point2 corners[4] = {{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}};
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int e = 0; e < 4; ++e) {
    const Point2 a = corners[e], b = corners[(e + 1) % 4];
    for (int i = 0; i < per_edge; ++i) pts.push_back(a + (static_cast<double>(i) / per_edge) * (b - a));
  }
  return pts;
}

namespace {

bool points_collide(const Pose2D& pose, const std::vector<Point2>& outline, const Scan& scan) {
  for (const Point2& local : outline) {
    const Point2 p = pose.to_world(local);
    const double r = p.norm();
    if (r >= scan[angle_to_beam(std::atan2(p.y, p.x), scan.spec)]) return true;
  }
  return false;
}

bool rollout_collides(Control u, int horizon, double dt, const std::vector<Point2>& outline, const Scan& scan) {
  Pose2D pose;
  for (int k = 0; k < horizon; ++k) {
    pose = step(pose, u, dt);
    if (points_collide(pose, outline, scan)) return true;
  }
  return false;
}

}  // namespace

bool collision_check(const Plan& plan, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg) {
  plan.validate();
  const std::vector<Point2> outline = perimeter_points(fp, cfg.perimeter_points);
  Pose2D pose;
  for (const Control& u : plan.controls) {
    pose = step(pose, u, plan.dt);
    if (points_collide(pose, outline, scan)) return true;
  }
  return false;
}

double estimate_safety(Control u, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg,
                       std::uint64_t seed) {
  const std::vector<Point2> outline = perimeter_points(fp, cfg.perimeter_points);
  const double sigma_v = std::max(cfg.noise_frac * std::abs(u.v), cfg.noise_floor);
  const double sigma_w = std::max(cfg.noise_frac * std::abs(u.omega), cfg.noise_floor);
  int safe = 0;
  for (int j = 0; j < cfg.samples; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> nv(0.0, sigma_v), nw(0.0, sigma_w);
    const double dv = nv(rng);
    const double dw = nw(rng);
    const Control noisy{u.v + dv, u.omega + dw};
    if (!rollout_collides(noisy, cfg.horizon, cfg.mpc_dt, outline, scan)) ++safe;
  }
  return static_cast<double>(safe) / cfg.samples;
}

double modulation_factor(double p_safe, const SafetyConfig& cfg) {
  return std::exp(cfg.w1 - cfg.w2 * (1.0 - p_safe));
}

Control modulate(Control u, double p_safe, const SafetyConfig& cfg, const Limits& limits) {
  if (!(p_safe >= 0.0 && p_safe <= 1.0)) throw std::invalid_argument("modulate: probability outside [0, 1]");
  if (std::abs(u.omega) < cfg.omega_deadband) u.omega = 0.0;
  const double f = modulation_factor(p_safe, cfg);
  return limits.clamp({f * u.v, f * u.omega});
}

RecoveryResult recovery(Control u, const Scan& scan, const Footprint& fp, const SafetyConfig& cfg) {
  const std::vector<Point2> outline = perimeter_points(fp, cfg.perimeter_points);
  auto safe = [&](Control c) { return !rollout_collides(c, cfg.horizon, cfg.mpc_dt, outline, scan); };
  if (safe(u)) throw std::invalid_argument("recovery: the input control is already safe");
  const Limits lim = Limits::with_reverse();
  const double down = 1.0 - cfg.recovery_rate, up = 1.0 + cfg.recovery_rate;
  double fv = 1.0, fw = 1.0;
  for (int i = 1; i <= cfg.recovery_iters; ++i) {
    fv *= down;
    fw *= up;
    const Control c = lim.clamp({u.v * fv, u.omega * fw});
    if (safe(c)) return {c, 1, i};
  }
  double g = 1.0;
  for (int i = 1; i <= cfg.recovery_iters; ++i) {
    g *= up;
    const Control c = lim.clamp({-u.v * g, u.omega * g});
    if (safe(c)) return {c, 2, i};
  }
  return {Control{-cfg.backup_v, 0.0}, 3, 0};
}

Control pid_turn(double heading_error, const SafetyConfig& cfg) {
  const double omega_max = Limits{}.omega_max;
  return {0.0, std::clamp(cfg.pid_gain * heading_error, -omega_max, omega_max)};
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::TurnInPlace:
      return "turn_in_place";
    case Mode::LfH:
      return "lfh";
    case Mode::Recovery:
      return "recovery";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

LocalPolicy mlp_policy(MLPParams params, Limits limits, double goal_dist) {
  auto p = std::make_shared<const MLPParams>(std::move(params));
  return [p, limits, goal_dist](const PolicyInput& in) {
    return predict(*p, *in.scan, in.current, in.local_goal, limits, goal_dist);
  };
}

LocalPolicy pure_pursuit_policy(double lookahead, double speed, Limits limits) {
  if (!(lookahead > 0.0)) throw std::invalid_argument("pure_pursuit_policy: lookahead must be positive");
  limits.validate();
  return [lookahead, speed, limits](const PolicyInput& in) {
    const Point2 g = local_goal(*in.path, in.pose, lookahead);
    const double d2 = g.x * g.x + g.y * g.y;
    const double curvature = d2 > 1e-12 ? 2.0 * g.y / d2 : 0.0;
    return limits.clamp({speed, speed * curvature});
  };
}

LfhPipeline::LfhPipeline(const OccupancyGrid& grid, LocalPolicy policy, PipelineConfig cfg)
    : grid_(&grid), policy_(std::move(policy)), cfg_(std::move(cfg)),
      planner_(grid, cfg_.inflation_ladder, cfg_.clearance) {
  if (!policy_) throw std::invalid_argument("LfhPipeline: empty policy");
  cfg_.safety.validate();
  cfg_.limits.validate();
  cfg_.spec.validate();
  cfg_.footprint.validate();
}

namespace {

MLPParams checked(MLPParams params, const ScanSpec& spec) {
  if (params.input_dim() != input_dim(spec)) throw std::invalid_argument("model input does not match scan spec");
  return params;
}

}  // namespace

LfhPipeline::LfhPipeline(const OccupancyGrid& grid, MLPParams params, PipelineConfig cfg)
    : LfhPipeline(grid, mlp_policy(checked(std::move(params), cfg.spec), cfg.limits, cfg.goal_dist), cfg) {}

GlobalPlanner::Result LfhPipeline::global_path(const Pose2D& pose, const Pose2D& goal) const {
  return planner_.plan(pose, goal, &cfg_.footprint);
}

namespace {

// Portion of the path from `behind` meters before the projection of `p` to `ahead` meters
// after it. When the path starts less than `behind` before the projection, it is extended
// straight backwards along its first segment.
std::vector<Point2> path_window(const SmoothPath& path, Point2 p, double behind, double ahead) {
  const auto proj = path.project(p);
  const double begin = proj.s - behind, end = proj.s + ahead;
  const auto& arc = path.arc_length();
  const auto& pts_in = path.points();
  std::vector<Point2> pts;
  if (begin < 0.0) {
    const Point2 dir = (1.0 / distance(pts_in[1], pts_in[0])) * (pts_in[1] - pts_in[0]);
    pts.push_back(pts_in[0] + begin * dir);
  }
  pts.push_back(path.at(std::max(begin, 0.0)));
  for (std::size_t i = 1; i < path.size() && arc[i] < end; ++i) {
    if (arc[i] > begin && distance(pts_in[i], pts.back()) > 1e-9) pts.push_back(pts_in[i]);
  }
  const Point2 last = path.at(end);
  if (distance(last, pts.back()) > 1e-9) pts.push_back(last);
  return pts;
}

}  // namespace

TickResult LfhPipeline::tick(const Pose2D& pose, const Pose2D& goal, Control prev, const FsmState& /*state*/,
                             std::uint64_t seed) const {
  const SafetyConfig& sc = cfg_.safety;
  const Footprint& fp = cfg_.footprint;
  TickResult out;
  Diagnostics& d = out.diag;

  // (a) sense
  d.real_scan = raycast_grid(*grid_, pose, cfg_.spec);
  d.input_scan = d.real_scan;

  // (b) coarse global plan, artificial waypoints, smoothing
  const GlobalPlanner::Result plan = global_path(pose, goal);
  const SmoothPath& path = plan.path;
  d.inflation = plan.inflation;
  d.global_path = path.points();
  d.tangent_error = tangent_error(plan.plain, pose);
  d.local_goal = local_goal(path, pose, cfg_.goal_dist);

  auto unsafe = [&](Control c) {
    return collision_check(Plan::constant(c, sc.horizon, sc.mpc_dt), d.real_scan, fp, sc);
  };

  Control candidate;
  // A passage narrower than the footprint diagonal leaves no room to spin; the network then
  // has to take the turn on the move.
  if (std::abs(d.tangent_error) > sc.heading_threshold && !unsafe(pid_turn(d.tangent_error, sc))) {
    // (c) pre-processing: rotate towards the path tangent
    d.mode = Mode::TurnInPlace;
    candidate = pid_turn(d.tangent_error, sc);
  } else {
    // (d) hallucinate, infer, estimate safety, modulate
    d.mode = Mode::LfH;
    const std::vector<Point2> window = path_window(path, pose.position(), cfg_.corridor_behind, cfg_.corridor_length);
    if (window.size() >= 2) {
      const Corridor corridor = corridor_from_centerline(window, cfg_.corridor_offset);
      if (corridor.distance_to_centerline(pose.position()) < corridor.offset) {
        d.input_scan = combine_min(hallucinate_scan(corridor, pose, cfg_.spec), d.real_scan);
        d.hallucinated = true;
      }
    }
    d.learned = policy_({&d.input_scan, prev, d.local_goal, &path, pose});
    d.p_safety = estimate_safety(d.learned, d.real_scan, fp, sc, seed);
    d.modulation = modulation_factor(d.p_safety, sc);
    candidate = modulate(d.learned, d.p_safety, sc, cfg_.limits);
  }
  d.candidate = candidate;

  // (e) final check, recovery when unsafe
  if (unsafe(candidate)) {
    const RecoveryResult r = recovery(candidate, d.real_scan, fp, sc);
    d.mode = Mode::Recovery;
    d.recovery_stage = r.stage;
    out.control = r.control;
  } else {
    out.control = candidate;
  }
  out.state = {d.mode, d.recovery_stage};
  return out;
}

TickResult fsm_step(const LfhPipeline& pipeline, const Pose2D& pose, const Pose2D& goal, Control prev,
                    const FsmState& state, std::uint64_t seed) {
  return pipeline.tick(pose, goal, prev, state, seed);
}

}  // namespace lfh
