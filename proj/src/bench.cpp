#include "lfh/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace lfh {

namespace {

constexpr int kArcPoints = 64;

double snap(double v, double res) { return std::max(1.0, std::round(v / res)) * res; }

// Centerline with leads, before shifting into the grid frame.
struct RawCenterline {
  std::vector<Point2> points;  // start .. goal
  Point2 lead_in, lead_out;
  double goal_heading = 0.0;
};

RawCenterline raw_centerline(std::uint64_t seed, int segments, const CourseParams& p) {
  if (segments < 1) throw std::invalid_argument("course needs at least one section");
  if (!(p.resolution > 0.0) || !(p.straight_min > 0.0) || p.straight_max < p.straight_min ||
      !(p.turn_radius_min > 0.0) || p.turn_radius_max < p.turn_radius_min || p.lead < 0.0 || p.margin < 0.0) {
    throw std::invalid_argument("invalid course parameters");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return snap(lo + (hi - lo) * unit(rng), p.resolution); };

  RawCenterline c;
  Point2 pos{0.0, 0.0};
  Point2 fwd{1.0, 0.0};
  c.points.push_back(pos);
  for (int s = 0; s < segments; ++s) {
    pos = pos + draw(p.straight_min, p.straight_max) * fwd;
    c.points.push_back(pos);
    if (s + 1 == segments) break;
    int turn;  // +1 left, -1 right
    if (fwd.y == 0.0) {
      turn = unit(rng) < 0.5 ? 1 : -1;
    } else {
      turn = fwd.y > 0.0 ? -1 : 1;
    }
    const double r = draw(p.turn_radius_min, p.turn_radius_max);
    const Point2 left{-fwd.y, fwd.x};
    const Point2 center = pos + (turn * r) * left;
    const Point2 end = pos + r * fwd + (turn * r) * left;
    const double a0 = std::atan2(pos.y - center.y, pos.x - center.x);
    for (int k = 1; k < kArcPoints; ++k) {
      const double a = a0 + turn * (kPi / 2.0) * k / kArcPoints;
      c.points.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
    c.points.push_back(end);
    pos = end;
    fwd = turn * left;
  }
  c.lead_in = c.points.front() - p.lead * Point2{1.0, 0.0};
  c.lead_out = pos + p.lead * fwd;
  c.goal_heading = std::atan2(fwd.y, fwd.x);
  return c;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 e = b - a;
  const double len2 = dot(e, e);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, e) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * e);
}

}  // namespace

Course generate_course(std::uint64_t seed, double clearance_ratio, const Footprint& fp, int segments,
                       const CourseParams& params, std::vector<Point2>* centerline) {
  if (!(clearance_ratio > 1.0)) throw std::invalid_argument("clearance ratio must exceed 1");
  fp.validate();
  const RawCenterline raw = raw_centerline(seed, segments, params);
  const double res = params.resolution;
  const double half = clearance_ratio * fp.half_width;

  std::vector<Point2> line;
  line.reserve(raw.points.size() + 2);
  line.push_back(raw.lead_in);
  line.insert(line.end(), raw.points.begin(), raw.points.end());
  line.push_back(raw.lead_out);

  double minx = line[0].x, maxx = minx, miny = line[0].y, maxy = miny;
  for (const Point2& q : line) {
    minx = std::min(minx, q.x);
    maxx = std::max(maxx, q.x);
    miny = std::min(miny, q.y);
    maxy = std::max(maxy, q.y);
  }
  // Shift so the centerline stays on cell centers.
  const double pad = half + params.margin;
  const Point2 shift{(std::ceil((pad - minx) / res - 0.5) + 0.5) * res, (std::ceil((pad - miny) / res - 0.5) + 0.5) * res};
  for (Point2& q : line) q = q + shift;
  const int nx = static_cast<int>(std::ceil((maxx + shift.x + pad) / res));
  const int ny = static_cast<int>(std::ceil((maxy + shift.y + pad) / res));

  std::vector<std::uint8_t> solid(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 1);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Point2 a = line[i], b = line[i + 1];
    const int ix0 = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - half) / res)) - 1);
    const int ix1 = std::min(nx - 1, static_cast<int>(std::ceil((std::max(a.x, b.x) + half) / res)) + 1);
    const int iy0 = std::max(0, static_cast<int>(std::floor((std::min(a.y, b.y) - half) / res)) - 1);
    const int iy1 = std::min(ny - 1, static_cast<int>(std::ceil((std::max(a.y, b.y) + half) / res)) + 1);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        const Point2 c{(ix + 0.5) * res, (iy + 0.5) * res};
        if (segment_distance(c, a, b) <= half) solid[static_cast<std::size_t>(iy) * nx + ix] = 0;
      }
    }
  }

  // Solid cells as rectangles: runs per row, merged with identical runs of the row below.
  std::vector<Rect> rects;
  std::map<std::pair<int, int>, std::size_t> open;
  for (int iy = 0; iy < ny; ++iy) {
    std::map<std::pair<int, int>, std::size_t> next;
    for (int ix = 0; ix < nx;) {
      if (!solid[static_cast<std::size_t>(iy) * nx + ix]) {
        ++ix;
        continue;
      }
      int end = ix;
      while (end + 1 < nx && solid[static_cast<std::size_t>(iy) * nx + end + 1]) ++end;
      const auto key = std::make_pair(ix, end);
      if (auto it = open.find(key); it != open.end()) {
        rects[it->second].y1 = (iy + 1) * res;
        next[key] = it->second;
      } else {
        rects.push_back({ix * res, iy * res, (end + 1) * res, (iy + 1) * res});
        next[key] = rects.size() - 1;
      }
      ix = end + 1;
    }
    open = std::move(next);
  }

  if (centerline) centerline->assign(line.begin() + 1, line.end() - 1);
  const Point2 s = raw.points.front() + shift, g = raw.points.back() + shift;
  Course course = Course::build(std::move(rects), res, nx * res, ny * res, Pose2D(s.x, s.y, 0.0),
                                Pose2D(g.x, g.y, raw.goal_heading), fp);

  // The passage must hold its nominal width along the whole centerline.
  for (std::size_t i = 1; i + 2 < line.size(); ++i) {
    const Point2 a = line[i], b = line[i + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil(distance(a, b) / (0.5 * res))));
    for (int k = 0; k <= steps; ++k) {
      const double c = clearance(course.grid, a + (static_cast<double>(k) / steps) * (b - a));
      if (c < half - res || c > half + res) throw std::logic_error("course clearance off nominal");
    }
  }
  return course;
}

// ---------------------------------------------------------------------------

void DWAParams::validate() const {
  if (vx_samples < 1 || vtheta_samples < 1) throw std::invalid_argument("DWA sample counts must be >= 1");
  if (occdist_scale < 0.0 || pdist_scale < 0.0 || gdist_scale < 0.0) {
    throw std::invalid_argument("DWA scales must be non-negative");
  }
  if (!(max_vel_x >= 0.0) || !(max_vel_theta >= 0.0) || !(local_goal_dist > 0.0)) {
    throw std::invalid_argument("invalid DWA velocity bounds");
  }
}

std::vector<Control> dwa_samples(const DWAParams& params) {
  params.validate();
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> out;
    if (n == 1) return std::vector<double>{hi};
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
  };
  const std::vector<double> vs = linspace(0.0, params.max_vel_x, params.vx_samples);
  std::vector<double> ws = params.vtheta_samples == 1
                               ? std::vector<double>{0.0}
                               : linspace(-params.max_vel_theta, params.max_vel_theta, params.vtheta_samples);
  if (ws.front() < 0.0 && ws.back() > 0.0 && std::find(ws.begin(), ws.end(), 0.0) == ws.end()) {
    ws.insert(std::upper_bound(ws.begin(), ws.end(), 0.0), 0.0);
  }
  std::vector<Control> out;
  out.reserve(vs.size() * ws.size());
  for (double v : vs) {
    for (double w : ws) out.push_back({v, w});
  }
  return out;
}

namespace {

// Bucketed scan endpoints for exact nearest-point queries.
class EndpointIndex {
 public:
  explicit EndpointIndex(const Scan& scan) {
    for (int k = 0; k < scan.spec.beam_count; ++k) {
      const double r = scan[k];
      if (r >= scan.spec.max_range) continue;
      const double a = scan.spec.beam_angle(k);
      pts_.push_back({r * std::cos(a), r * std::sin(a)});
    }
    if (pts_.empty()) return;
    lo_ = pts_[0];
    Point2 hi = pts_[0];
    for (const Point2& p : pts_) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    nx_ = static_cast<int>((hi.x - lo_.x) / kCell) + 1;
    ny_ = static_cast<int>((hi.y - lo_.y) / kCell) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (const Point2& p : pts_) buckets_[bucket(cx(p.x), cy(p.y))].push_back(p);
  }

  /// Distance to the nearest endpoint, +inf when there are none.
  double nearest(Point2 q) const {
    double best = std::numeric_limits<double>::infinity();
    if (pts_.empty()) return best;
    const int qx = cx(q.x), qy = cy(q.y);
    const int max_ring = std::max(nx_, ny_) + std::max(std::abs(qx), std::abs(qy)) + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Every point in ring `ring` is at least (ring - 1) cells away.
      if ((ring - 1) * kCell > best) break;
      for (int iy = qy - ring; iy <= qy + ring; ++iy) {
        for (int ix = qx - ring; ix <= qx + ring; ++ix) {
          if (std::max(std::abs(ix - qx), std::abs(iy - qy)) != ring) continue;
          if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) continue;
          for (const Point2& p : buckets_[bucket(ix, iy)]) best = std::min(best, distance(p, q));
        }
      }
    }
    return best;
  }

 private:
  static constexpr double kCell = 0.1;
  int cx(double x) const { return static_cast<int>(std::floor((x - lo_.x) / kCell)); }
  int cy(double y) const { return static_cast<int>(std::floor((y - lo_.y) / kCell)); }
  std::size_t bucket(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }

  std::vector<Point2> pts_;
  Point2 lo_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<Point2>> buckets_;
};

struct DwaContext {
  const Scan& scan;
  const Pose2D& pose;
  const SmoothPath& path;
  Point2 local_goal;  // world frame
  EndpointIndex endpoints;
  std::vector<Point2> outline;
};

Point2 dwa_local_goal(const SmoothPath& path, const Pose2D& pose, const Pose2D& goal, double dist) {
  if (distance(pose.position(), goal.position()) <= dist) return goal.position();
  return path.at(path.project(pose.position()).s + dist);
}

std::optional<double> score_sample(Control u, const DwaContext& ctx, const DWAParams& params,
                                   const Footprint& fp, const SafetyConfig& safety) {
  if (collision_check(Plan::constant(u, safety.horizon, safety.mpc_dt), ctx.scan, fp, safety)) return std::nullopt;
  Pose2D local;
  double min_clear = std::numeric_limits<double>::infinity();
  for (int k = 0; k < safety.horizon; ++k) {
    local = step(local, u, safety.mpc_dt);
    min_clear = std::min(min_clear, ctx.endpoints.nearest(local.position()));
  }
  const Point2 end = ctx.pose.to_world(local.position());
  const double occ = std::isinf(min_clear) ? 0.0 : 1.0 / std::max(min_clear, 1e-9);
  return params.occdist_scale * occ + params.pdist_scale * ctx.path.project(end).distance +
         params.gdist_scale * distance(end, ctx.local_goal);
}

}  // namespace

std::optional<double> dwa_score(Control u, const Scan& scan, const Pose2D& pose, const SmoothPath& path,
                                const Pose2D& goal, const DWAParams& params, const Footprint& fp,
                                const SafetyConfig& safety) {
  const DwaContext ctx{scan, pose, path, dwa_local_goal(path, pose, goal, params.local_goal_dist), EndpointIndex(scan),
                       {}};
  return score_sample(u, ctx, params, fp, safety);
}

DwaDecision dwa_plan(const Scan& scan, const Pose2D& pose, const SmoothPath& path, const Pose2D& goal,
                     const DWAParams& params, const Footprint& fp, const SafetyConfig& safety) {
  const std::vector<Control> samples = dwa_samples(params);
  const DwaContext ctx{scan, pose, path, dwa_local_goal(path, pose, goal, params.local_goal_dist), EndpointIndex(scan),
                       {}};
  DwaDecision best;
  best.stuck = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto s = score_sample(samples[i], ctx, params, fp, safety);
    if (!s) continue;
    if (best.stuck || *s < best.score) {
      best = {samples[i], false, static_cast<int>(i), *s};
    }
  }
  if (best.stuck) best = {Control{}, true, -1, 0.0};
  return best;
}

// ---------------------------------------------------------------------------

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Success:
      return "Success";
    case Outcome::Collision:
      return "Collision";
    case Outcome::Failure:
      return "Failure";
  }
  return "Failure";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "Success") return Outcome::Success;
  if (s == "Collision") return Outcome::Collision;
  if (s == "Failure") return Outcome::Failure;
  throw std::invalid_argument("unknown outcome: " + s);
}

std::string planner_name(const PlannerChoice& p) {
  if (std::holds_alternative<LfhPlanner>(p)) return "lfh";
  return std::holds_alternative<DwaPlanner>(p) ? "dwa" : "reference";
}

TrialResult run_trial(const Course& course, const PlannerChoice& planner, std::uint64_t seed,
                      const TrialOptions& options) {
  if (!(options.dt > 0.0) || !(options.timeout > 0.0)) throw std::invalid_argument("invalid trial timing");
  const bool lfh = !std::holds_alternative<DwaPlanner>(planner);
  const PipelineConfig& cfg = std::visit([](const auto& p) -> const PipelineConfig& { return p.config; }, planner);
  const Footprint& fp = cfg.footprint;
  const OccupancyGrid& grid = course.grid;

  std::optional<LfhPipeline> pipeline;
  std::optional<GlobalPlanner> global;
  if (const auto* p = std::get_if<LfhPlanner>(&planner)) {
    pipeline.emplace(grid, p->params, cfg);
  } else if (const auto* r = std::get_if<ReferencePlanner>(&planner)) {
    pipeline.emplace(grid, pure_pursuit_policy(r->lookahead, r->speed, cfg.limits), cfg);
  } else {
    std::get<DwaPlanner>(planner).params.validate();
    global.emplace(grid, cfg.inflation_ladder, cfg.clearance);
  }

  auto reached = [&](const Pose2D& p) { return fp.contains_local(course.goal.to_local(p.position())); };

  TrialResult result;
  result.seed = seed;
  Pose2D pose = course.start;
  Control prev;
  FsmState state;
  bool in_contact = footprint_collides(grid, pose, fp);
  double stuck_time = 0.0;
  const long max_ticks = static_cast<long>(std::ceil(options.timeout / options.dt - 1e-9));
  long ticks = 0;
  bool done = reached(pose);
  bool failed = false;

  while (!done && !failed && ticks < max_ticks) {
    Control u;
    bool stuck = false;
    std::optional<TickResult> tr;
    if (lfh) {
      try {
        tr = pipeline->tick(pose, course.goal, prev, state, derive_seed(seed, static_cast<std::uint64_t>(ticks)));
        u = tr->control;
        state = tr->state;
      } catch (const NoPathError&) {
        stuck = true;
      }
    } else {
      try {
        const Scan scan = raycast_grid(grid, pose, cfg.spec);
        const auto plan = global->plan(pose, course.goal);
        const DwaDecision d = dwa_plan(scan, pose, plan.path, course.goal, std::get<DwaPlanner>(planner).params, fp,
                                       cfg.safety);
        u = d.control;
        stuck = d.stuck;
      } catch (const NoPathError&) {
        stuck = true;
      }
    }
    pose = step(pose, u, options.dt);
    ++ticks;
    if (!grid.contains(pose.position())) {
      failed = true;
      break;
    }
    const bool contact = footprint_collides(grid, pose, fp);
    if (contact && !in_contact) ++result.collision_count;
    in_contact = contact;
    if (options.on_tick) {
      options.on_tick({static_cast<int>(ticks), pose, u, contact, stuck, tr ? &tr->diag : nullptr});
    }
    stuck_time = stuck ? stuck_time + options.dt : 0.0;
    if (stuck_time >= options.stuck_timeout - 1e-9) failed = true;
    prev = u;
    done = reached(pose);
  }

  if (done && !failed) {
    result.outcome = result.collision_count == 0 ? Outcome::Success : Outcome::Collision;
    result.traversal_time = static_cast<double>(ticks) * options.dt;
  } else {
    result.outcome = Outcome::Failure;
    result.traversal_time = std::numeric_limits<double>::infinity();
  }
  return result;
}

std::vector<TrialResult> run_trials(std::span<const Course> courses, const PlannerChoice& planner, int trials,
                                    std::uint64_t base_seed, const TrialOptions& options, int threads) {
  if (courses.empty() || trials < 1) throw std::invalid_argument("run_trials needs courses and trials >= 1");
  TrialOptions opts = options;
  opts.on_tick = nullptr;
  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, trials);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
      for (int i = next++; i < trials; i = next++) {
        const Course& c = courses[static_cast<std::size_t>(i) % courses.size()];
        results[static_cast<std::size_t>(i)] = run_trial(c, planner, base_seed + static_cast<std::uint64_t>(i), opts);
      }
    } catch (...) {
      const std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = trials;  // stop the other workers early
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

Report report(std::span<const TrialResult> trials) {
  if (trials.empty()) throw std::invalid_argument("report needs at least one trial");
  Report r;
  std::vector<double> times;
  for (const TrialResult& t : trials) {
    switch (t.outcome) {
      case Outcome::Success:
        ++r.success;
        times.push_back(t.traversal_time);
        break;
      case Outcome::Collision:
        ++r.collision;
        times.push_back(t.traversal_time);
        break;
      case Outcome::Failure:
        ++r.failure;
        break;
    }
  }
  if (times.empty()) {
    r.mean_time = std::numeric_limits<double>::infinity();
    r.std_time = std::numeric_limits<double>::infinity();
    return r;
  }
  double sum = 0.0;
  for (double t : times) sum += t;
  r.mean_time = sum / static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - r.mean_time) * (t - r.mean_time);
  r.std_time = std::sqrt(var / static_cast<double>(times.size()));
  return r;
}

namespace {

std::string fmt_time(double t) {
  if (std::isinf(t)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", t);
  return buf;
}

}  // namespace

std::string results_csv(const std::string& planner, std::span<const TrialResult> trials) {
  std::vector<TrialResult> sorted(trials.begin(), trials.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  std::string out = "planner,seed,outcome,collisions,time_s\n";
  for (const TrialResult& t : sorted) {
    out += planner + "," + std::to_string(t.seed) + "," + to_string(t.outcome) + "," +
           std::to_string(t.collision_count) + "," + fmt_time(t.traversal_time) + "\n";
  }
  return out;
}

std::string report_table(const std::string& planner, const Report& r) {
  char buf[256];
  if (std::isinf(r.mean_time)) {
    std::snprintf(buf, sizeof buf, "%-6s success %d  collision %d  failure %d  time inf\n", planner.c_str(), r.success,
                  r.collision, r.failure);
  } else {
    std::snprintf(buf, sizeof buf, "%-6s success %d  collision %d  failure %d  time %.2f +- %.2f s\n", planner.c_str(),
                  r.success, r.collision, r.failure, r.mean_time, r.std_time);
  }
  return buf;
}

// ---------------------------------------------------------------------------

ComplexityReport complexity_enumerate(int n, int x, std::uint64_t leaf_budget) {
  if (n < 1 || n > 20) throw std::invalid_argument("complexity: n must be in [1, 20]");
  if (x < 2 || x > 4) throw std::invalid_argument("complexity: x must be in [2, 4]");
  using boost::multiprecision::cpp_int;
  ComplexityReport rep;
  rep.n = n;
  rep.x = x;
  rep.config_count = cpp_int(1) << (n * n);
  rep.trajectory_count = boost::multiprecision::pow(cpp_int(x), static_cast<unsigned>(n));

  std::uint64_t naive = 1;
  for (int i = 0; i < n; ++i) naive *= static_cast<std::uint64_t>(x);
  rep.exhaustive = naive <= leaf_budget;

  if (rep.exhaustive) {
    // Explicit stack of branch choices; one leaf per complete sequence.
    std::vector<int> choice(static_cast<std::size_t>(n), 0);
    std::uint64_t leaves = 0;
    int depth = 0;
    while (true) {
      if (depth == n) {
        ++leaves;
        --depth;
        while (depth >= 0 && ++choice[static_cast<std::size_t>(depth)] == x) {
          choice[static_cast<std::size_t>(depth)] = 0;
          --depth;
        }
        if (depth < 0) break;
        ++depth;
        continue;
      }
      ++depth;
    }
    rep.enumerated_count = leaves;
  } else {
    // Subtrees rooted at the same depth are identical: count the first one, reuse it.
    std::vector<std::optional<std::uint64_t>> memo(static_cast<std::size_t>(n) + 1);
    std::function<std::uint64_t(int)> count = [&](int depth) -> std::uint64_t {
      if (depth == n) return 1;
      auto& m = memo[static_cast<std::size_t>(depth)];
      if (m) return *m;
      std::uint64_t total = 0;
      for (int b = 0; b < x; ++b) total += count(depth + 1);
      m = total;
      return total;
    };
    rep.enumerated_count = count(0);
  }
  return rep;
}

}  // namespace lfh
