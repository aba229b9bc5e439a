#include "lfh/hallucination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lfh {

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 e = b - a;
  const double len2 = dot(e, e);
  double s = len2 > 0.0 ? dot(p - a, e) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return distance(p, a + s * e);
}

bool inside_free_space(Point2 w, const std::vector<Point2>& centerline, double offset) {
  const double limit2 = offset * offset * (1.0 - 1e-9);
  for (const Point2& c : centerline) {
    const Point2 d = w - c;
    if (dot(d, d) < limit2) return true;
  }
  return false;
}

std::vector<bool> active_mask(const std::vector<Point2>& wall, const std::vector<Point2>& centerline,
                              double offset) {
  // A wall vertex closer than `offset` to some centerline point lies inside the free space.
  std::vector<bool> active(wall.size(), true);
  for (std::size_t j = 0; j < wall.size(); ++j) active[j] = !inside_free_space(wall[j], centerline, offset);
  return active;
}

// Traces one wall between consecutive vertices as the exact offset of the centerline: an arc
// of radius `offset` around vertex i from its own wall point to the offset line of segment
// (i, i+1), along that line, and an arc around vertex i+1 to its wall point. Arcs are split
// every few degrees. Candidate points closer than `offset` to the centerline (the folded
// inner side of tight turns) break the wall, as inactive vertices do.
constexpr double kMaxArcStep = 5.0 * kPi / 180.0;

double centerline_distance(Point2 p, const std::vector<Point2>& centerline) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
    best = std::min(best, point_segment_distance(p, centerline[i], centerline[i + 1]));
  }
  return best;
}

void arc(std::vector<Point2>& out, Point2 center, double radius, double from, double to) {
  const double turn = wrap_angle(to - from);
  const int pieces = static_cast<int>(std::ceil(std::abs(turn) / kMaxArcStep));
  for (int k = 1; k < pieces; ++k) {
    const double a = from + turn * k / pieces;
    out.push_back(center + radius * Point2{std::cos(a), std::sin(a)});
  }
}

void append_segments(std::vector<Segment>& out, const Corridor& c, const std::vector<Point2>& wall,
                     const std::vector<bool>& active, double side) {
  const double o = c.offset;
  for (std::size_t i = 0; i + 1 < wall.size(); ++i) {
    if (!active[i] || !active[i + 1]) continue;
    const Point2 p0 = c.centerline[i], p1 = c.centerline[i + 1];
    const Point2 t = (1.0 / distance(p0, p1)) * (p1 - p0);
    const Point2 n = side * Point2{-t.y, t.x};
    const double a_seg = std::atan2(n.y, n.x);
    const double a0 = std::atan2(wall[i].y - p0.y, wall[i].x - p0.x);
    const double a1 = std::atan2(wall[i + 1].y - p1.y, wall[i + 1].x - p1.x);
    std::vector<Point2> pts{wall[i]};
    arc(pts, p0, o, a0, a_seg);
    pts.push_back(p0 + o * n);
    pts.push_back(p1 + o * n);
    arc(pts, p1, o, a_seg, a1);
    pts.push_back(wall[i + 1]);
    Point2 from = pts.front();
    bool open = true;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const Point2 w = pts[k];
      if (distance(w, from) < 1e-9) continue;
      // On the inner side of a gentle curve these points sit a few microns inside; only a
      // real fold (1% of the offset) breaks the wall.
      const bool keep = k + 1 == pts.size() || centerline_distance(w, c.centerline) > o * (1.0 - 1e-2);
      if (keep && open) out.push_back({from, w});
      open = keep;
      from = w;
    }
  }
}

}  // namespace

std::vector<Segment> Corridor::wall_segments() const {
  std::vector<Segment> out;
  out.reserve(left_wall.size() + right_wall.size());
  append_segments(out, *this, left_wall, left_active, 1.0);
  append_segments(out, *this, right_wall, right_active, -1.0);
  return out;
}

double Corridor::distance_to_centerline(Point2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
    best = std::min(best, point_segment_distance(p, centerline[i], centerline[i + 1]));
  }
  return best;
}

double Corridor::distance_to_walls(Point2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : wall_segments()) best = std::min(best, point_segment_distance(p, s.a, s.b));
  return best;
}

Corridor corridor_from_centerline(std::span<const Point2> points, double offset) {
  if (points.size() < 2) throw std::invalid_argument("corridor needs at least two centerline points");
  if (!(offset > 0.0)) throw std::invalid_argument("corridor offset must be positive");
  const std::size_t n = points.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (points[i] == points[i + 1]) throw std::invalid_argument("corridor centerline repeats a point");
  }
  Corridor c;
  c.offset = offset;
  c.centerline.assign(points.begin(), points.end());
  c.left_wall.resize(n);
  c.right_wall.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = points[i == 0 ? 0 : i - 1];
    const Point2 next = points[i + 1 == n ? n - 1 : i + 1];
    Point2 t = next - prev;
    const double len = t.norm();
    if (!(len > 0.0)) throw std::invalid_argument("corridor centerline has a degenerate tangent");
    t = (1.0 / len) * t;
    const Point2 normal{-t.y, t.x};
    c.left_wall[i] = points[i] + offset * normal;
    c.right_wall[i] = points[i] - offset * normal;
  }
  c.left_active = active_mask(c.left_wall, c.centerline, offset);
  c.right_active = active_mask(c.right_wall, c.centerline, offset);
  return c;
}

Scan hallucinate_scan(const Corridor& corridor, const Pose2D& pose, const ScanSpec& spec) {
  if (!(corridor.distance_to_centerline(pose.position()) < corridor.offset)) {
    throw std::invalid_argument("hallucinate_scan: pose is outside the corridor");
  }
  const std::vector<Segment> walls = corridor.wall_segments();
  return raycast_segments(walls, pose, spec);
}

Scan deploy_hallucinate(std::span<const Point2> path, const Pose2D& pose, const ScanSpec& spec, const Scan& real,
                        double offset) {
  if (path.empty()) throw std::invalid_argument("deploy_hallucinate: empty path");
  if (!(real.spec == spec)) throw std::invalid_argument("deploy_hallucinate: real scan spec differs");
  const Corridor corridor = corridor_from_centerline(path, offset);
  return combine_min(hallucinate_scan(corridor, pose, spec), real);
}

bool corridor_contains(const Corridor& corridor, const Pose2D& pose, double half_width) {
  return corridor.distance_to_walls(pose.position()) > half_width;
}

}  // namespace lfh
