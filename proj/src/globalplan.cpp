#include "lfh/globalplan.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace lfh {

InflatedGrid::InflatedGrid(const OccupancyGrid& grid, double inflation)
    : grid_(&grid), inflation_(inflation), blocked_(grid.cells().size(), 0) {
  if (!(inflation >= 0.0)) throw std::invalid_argument("inflation must be non-negative");
  const double res = grid.resolution();
  const int r = static_cast<int>(std::floor(inflation / res + 1e-9));
  const double limit2 = inflation * inflation + 1e-12;
  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (!grid.in_bounds(jx, jy)) continue;
          const double d2 = (dx * res) * (dx * res) + (dy * res) * (dy * res);
          if (d2 <= limit2) blocked_[grid.index(jx, jy)] = 1;
        }
      }
    }
  }
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double octile(CellIndex a, CellIndex b) {
  const int dx = std::abs(a.ix - b.ix), dy = std::abs(a.iy - b.iy);
  return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

}  // namespace

GridPath plan_global(const InflatedGrid& map, const Pose2D& start, const Pose2D& goal,
                     std::span<const double> penalty) {
  const OccupancyGrid& grid = map.grid();
  if (!penalty.empty() && penalty.size() != grid.cells().size()) {
    throw std::invalid_argument("plan_global: penalty size does not match the grid");
  }
  const auto s = grid.cell_of(start.position());
  const auto g = grid.cell_of(goal.position());
  if (!s || !g) throw NoPathError("start or goal lies outside the grid");
  if (map.blocked(s->ix, s->iy)) throw NoPathError("start cell is blocked");
  if (map.blocked(g->ix, g->iy)) throw NoPathError("goal cell is blocked");

  const std::size_t n = grid.cells().size();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  using Entry = std::tuple<double, double, std::size_t>;  // f, h, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t si = grid.index(s->ix, s->iy), gi = grid.index(g->ix, g->iy);
  cost[si] = 0.0;
  open.emplace(octile(*s, *g), octile(*s, *g), si);
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const auto [f, h, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (idx == gi) break;
    const int ix = static_cast<int>(idx % static_cast<std::size_t>(grid.width()));
    const int iy = static_cast<int>(idx / static_cast<std::size_t>(grid.width()));
    for (int k = 0; k < 8; ++k) {
      const int jx = ix + kDx[k], jy = iy + kDy[k];
      if (!grid.in_bounds(jx, jy) || map.blocked(jx, jy)) continue;
      // No corner cutting past blocked cells.
      if (k >= 4 && (map.blocked(ix + kDx[k], iy) || map.blocked(ix, iy + kDy[k]))) continue;
      const std::size_t j = grid.index(jx, jy);
      if (closed[j]) continue;
      double step = k >= 4 ? kSqrt2 : 1.0;
      if (!penalty.empty()) step *= 1.0 + 0.5 * (penalty[idx] + penalty[j]);
      const double c = cost[idx] + step;
      if (c < cost[j]) {
        cost[j] = c;
        parent[j] = static_cast<std::int64_t>(idx);
        const double hj = octile({jx, jy}, *g);
        open.emplace(c + hj, hj, j);
      }
    }
  }
  if (!closed[gi]) throw NoPathError("goal is unreachable");

  GridPath path;
  path.cost = cost[gi];
  for (std::int64_t i = static_cast<std::int64_t>(gi); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    const auto u = static_cast<std::size_t>(i);
    path.cells.push_back({static_cast<int>(u % static_cast<std::size_t>(grid.width())),
                          static_cast<int>(u / static_cast<std::size_t>(grid.width()))});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

GridPath plan_global(const OccupancyGrid& grid, const Pose2D& start, const Pose2D& goal, double inflation) {
  const InflatedGrid map(grid, inflation);
  return plan_global(map, start, goal);
}

std::vector<double> clearance_map(const OccupancyGrid& grid, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("clearance_map: cap must be positive");
  const std::size_t n = grid.cells().size();
  const int w = grid.width();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> seed(n, -1);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.cells()[i]) {
      dist[i] = 0.0;
      seed[i] = static_cast<std::int64_t>(i);
      open.emplace(0.0, i);
    }
  }
  const double res = grid.resolution();
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist[idx] || d >= cap) continue;
    const int ix = static_cast<int>(idx % static_cast<std::size_t>(w)), iy = static_cast<int>(idx / static_cast<std::size_t>(w));
    const auto s = static_cast<std::size_t>(seed[idx]);
    const int sx = static_cast<int>(s % static_cast<std::size_t>(w)), sy = static_cast<int>(s / static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if ((dx == 0 && dy == 0) || !grid.in_bounds(jx, jy)) continue;
        const std::size_t j = grid.index(jx, jy);
        const double dj = res * std::hypot(jx - sx, jy - sy);
        if (dj < dist[j]) {
          dist[j] = dj;
          seed[j] = static_cast<std::int64_t>(s);
          open.emplace(dj, j);
        }
      }
    }
  }
  for (double& d : dist) d = std::min(d, cap);
  return dist;
}

std::vector<Point2> path_points(const OccupancyGrid& grid, const GridPath& path) {
  std::vector<Point2> pts;
  pts.reserve(path.cells.size());
  for (const CellIndex& c : path.cells) pts.push_back(grid.cell_center(c.ix, c.iy));
  return pts;
}

std::vector<Point2> inject_artificial_waypoints(std::span<const Point2> path, const Pose2D& pose,
                                                const Footprint& fp) {
  if (path.empty()) throw std::invalid_argument("inject_artificial_waypoints: empty path");
  std::vector<Point2> out;
  out.reserve(std::max<std::size_t>(path.size(), kArtificialWaypoints + 1));
  for (int k = 0; k < kArtificialWaypoints; ++k) {
    const double x = -fp.half_length() + fp.length * k / (kArtificialWaypoints - 1);
    out.push_back(pose.to_world({x, 0.0}));
  }
  if (path.size() <= static_cast<std::size_t>(kArtificialWaypoints)) {
    out.push_back(path.back());
  } else {
    out.insert(out.end(), path.begin() + kArtificialWaypoints, path.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

SmoothPath::SmoothPath(std::vector<Point2> points) {
  for (const Point2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("SmoothPath: non-finite point");
    if (points_.empty() || distance(p, points_.back()) > 1e-9) points_.push_back(p);
  }
  if (points_.size() < 2) throw std::invalid_argument("SmoothPath needs at least two distinct points");
  arc_.resize(points_.size());
  arc_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) arc_[i] = arc_[i - 1] + distance(points_[i - 1], points_[i]);
}

SmoothPath::Projection SmoothPath::project(Point2 p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Point2 a = points_[i], e = points_[i + 1] - points_[i];
    const double len2 = dot(e, e);
    const double t = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
    const Point2 q = a + t * e;
    const double d = distance(p, q);
    if (d < best.distance) {
      best = {i, q, arc_[i] + t * std::sqrt(len2), d};
    }
  }
  return best;
}

Point2 SmoothPath::at(double s) const {
  if (s <= 0.0) return points_.front();
  if (s >= arc_.back()) return points_.back();
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const auto i = static_cast<std::size_t>(it - arc_.begin()) - 1;
  const double t = (s - arc_[i]) / (arc_[i + 1] - arc_[i]);
  return points_[i] + t * (points_[i + 1] - points_[i]);
}

double SmoothPath::tangent_at_segment(std::size_t segment) const {
  segment = std::min(segment, points_.size() - 2);
  const Point2 d = points_[segment + 1] - points_[segment];
  return std::atan2(d.y, d.x);
}

// ---------------------------------------------------------------------------

namespace {

// Row q holds the weights giving the fitted value at window position q.
Eigen::MatrixXd savgol_weights(int window, int polyorder) {
  const double c = 0.5 * (window - 1);
  const double scale = std::max(c, 1.0);
  Eigen::MatrixXd vander(window, polyorder + 1);
  for (int j = 0; j < window; ++j) {
    const double t = (j - c) / scale;
    double pw = 1.0;
    for (int k = 0; k <= polyorder; ++k) {
      vander(j, k) = pw;
      pw *= t;
    }
  }
  const Eigen::MatrixXd pinv = vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  return vander * pinv;
}

}  // namespace

std::vector<double> savgol_filter(std::span<const double> values, int window, int polyorder) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("savgol: window must be a positive odd number");
  if (polyorder < 0 || polyorder >= window) throw std::invalid_argument("savgol: polyorder must be < window");
  const int n = static_cast<int>(values.size());
  if (n == 0) return {};
  if (n < window) {
    window = n % 2 == 1 ? n : n - 1;
    polyorder = std::min(polyorder, window - 1);
  }
  const Eigen::MatrixXd weights = savgol_weights(window, polyorder);
  const int half = window / 2;
  std::vector<double> out(values.size());
  for (int i = 0; i < n; ++i) {
    const int start = std::clamp(i - half, 0, n - window);
    const int q = i - start;
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += weights(q, j) * values[static_cast<std::size_t>(start + j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<Point2> savgol_filter(std::span<const Point2> points, int window, int polyorder) {
  std::vector<double> xs(points.size()), ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs[i] = points[i].x;
    ys[i] = points[i].y;
  }
  const auto fx = savgol_filter(xs, window, polyorder);
  const auto fy = savgol_filter(ys, window, polyorder);
  std::vector<Point2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = {fx[i], fy[i]};
  return out;
}

SmoothPath smooth_savgol(std::span<const Point2> points, int window, int polyorder) {
  return SmoothPath(savgol_filter(points, window, polyorder));
}

GlobalPlanner::GlobalPlanner(const OccupancyGrid& grid, std::vector<double> inflation_ladder, ClearanceCost cost)
    : grid_(&grid) {
  if (inflation_ladder.empty()) throw std::invalid_argument("inflation ladder must not be empty");
  if (!(cost.weight >= 0.0)) throw std::invalid_argument("clearance weight must be non-negative");
  if (cost.weight > 0.0) {
    penalty_ = clearance_map(grid, cost.cap);
    for (double& p : penalty_) p = cost.weight * (1.0 - p / cost.cap);
  }
  levels_.reserve(inflation_ladder.size());
  for (double r : inflation_ladder) levels_.emplace_back(grid, r);
}

GlobalPlanner::Result GlobalPlanner::plan(const Pose2D& pose, const Pose2D& goal, const Footprint* fp) const {
  for (const InflatedGrid& map : levels_) {
    GridPath gp;
    try {
      gp = plan_global(map, pose, goal, penalty_);
    } catch (const NoPathError&) {
      continue;
    }
    const std::vector<Point2> raw = path_points(*grid_, gp);
    std::vector<Point2> plain = raw;
    plain.front() = pose.position();
    if (plain.size() == 1) plain.push_back(goal.position());
    plain.back() = goal.position();
    SmoothPath smooth_plain = smooth_savgol(plain);
    if (!fp) return {smooth_plain, map.inflation(), smooth_plain};
    std::vector<Point2> pts = inject_artificial_waypoints(raw, pose, *fp);
    pts.back() = goal.position();
    return {smooth_savgol(pts), map.inflation(), std::move(smooth_plain)};
  }
  throw NoPathError("no global path at any inflation level");
}

Point2 local_goal(const SmoothPath& path, const Pose2D& pose, double dist) {
  const auto proj = path.project(pose.position());
  return pose.to_local(path.at(proj.s + dist));
}

double tangent_error(const SmoothPath& path, const Pose2D& pose) {
  const auto proj = path.project(pose.position());
  return wrap_angle(path.tangent_at_segment(proj.segment) - pose.psi());
}

}  // namespace lfh
