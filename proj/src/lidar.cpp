#include "lfh/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lfh {

void ScanSpec::validate() const {
  if (!(increment > 0.0) || !(angle_max > angle_min) || !(max_range > 0.0)) {
    throw std::invalid_argument("invalid scan spec");
  }
  const int expected = static_cast<int>(std::floor((angle_max - angle_min) / increment)) + 1;
  if (beam_count != expected) throw std::invalid_argument("scan spec beam_count is inconsistent");
}

int angle_to_beam(double theta, const ScanSpec& spec) {
  const long k = std::lround((theta - spec.angle_min) / spec.increment);
  return static_cast<int>(std::clamp<long>(k, 0, spec.beam_count - 1));
}

namespace {

struct BeamTable {
  std::vector<double> cos;
  std::vector<double> sin;
};

BeamTable beam_table(const ScanSpec& spec) {
  BeamTable t;
  t.cos.resize(static_cast<std::size_t>(spec.beam_count));
  t.sin.resize(static_cast<std::size_t>(spec.beam_count));
  for (int k = 0; k < spec.beam_count; ++k) {
    t.cos[k] = std::cos(spec.beam_angle(k));
    t.sin[k] = std::sin(spec.beam_angle(k));
  }
  return t;
}

// Distance along the unit ray `dir` from the origin to segment [a, b], or +inf.
inline double ray_hit(Point2 dir, Point2 a, Point2 b) {
  const Point2 e = b - a;
  const double denom = cross(dir, e);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  const double t = cross(a, e) / denom;
  const double s = cross(a, dir) / denom;
  if (t > 0.0 && s >= 0.0 && s <= 1.0) return t;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

Scan raycast_grid(const OccupancyGrid& grid, const Pose2D& pose, const ScanSpec& spec) {
  const auto start = grid.cell_of(pose.position());
  if (!start) throw std::invalid_argument("raycast_grid: pose outside grid");
  Scan scan = Scan::empty(spec);
  const double res = grid.resolution();
  const double ox = pose.x - grid.origin().x;
  const double oy = pose.y - grid.origin().y;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  for (int k = 0; k < spec.beam_count; ++k) {
    const double a = pose.psi() + spec.beam_angle(k);
    const double dx = std::cos(a), dy = std::sin(a);
    int ix = start->ix, iy = start->iy;
    const int sx = dx > 0 ? 1 : -1;
    const int sy = dy > 0 ? 1 : -1;
    // Ray parameter (meters) at which the next x / y cell boundary is crossed.
    double tx = dx != 0.0 ? ((sx > 0 ? (ix + 1) * res : ix * res) - ox) / dx : kInf;
    double ty = dy != 0.0 ? ((sy > 0 ? (iy + 1) * res : iy * res) - oy) / dy : kInf;
    const double step_x = dx != 0.0 ? res / std::abs(dx) : kInf;
    const double step_y = dy != 0.0 ? res / std::abs(dy) : kInf;
    double hit = spec.max_range;
    while (true) {
      double t;
      if (tx < ty) {
        t = tx;
        tx += step_x;
        ix += sx;
      } else {
        t = ty;
        ty += step_y;
        iy += sy;
      }
      if (t >= spec.max_range || !grid.in_bounds(ix, iy)) break;
      if (grid.occupied(ix, iy)) {
        hit = std::max(t, std::numeric_limits<double>::min());
        break;
      }
    }
    scan.ranges[static_cast<std::size_t>(k)] = hit;
  }
  return scan;
}

Scan raycast_segments(std::span<const Segment> walls, const Pose2D& origin_pose, const ScanSpec& spec) {
  Scan scan = Scan::empty(spec);
  if (walls.empty()) return scan;
  const BeamTable table = beam_table(spec);
  auto& r = scan.ranges;

  auto cast_range = [&](int k0, int k1, Point2 a, Point2 b) {
    k0 = std::max(k0, 0);
    k1 = std::min(k1, spec.beam_count - 1);
    for (int k = k0; k <= k1; ++k) {
      const double t = ray_hit({table.cos[k], table.sin[k]}, a, b);
      if (t < r[k]) r[k] = t;
    }
  };
  auto index_floor = [&](double angle) { return static_cast<int>(std::floor((angle - spec.angle_min) / spec.increment)); };
  auto index_ceil = [&](double angle) { return static_cast<int>(std::ceil((angle - spec.angle_min) / spec.increment)); };

  for (const Segment& w : walls) {
    const Point2 a = origin_pose.to_local(w.a);
    const Point2 b = origin_pose.to_local(w.b);
    const double ta = std::atan2(a.y, a.x);
    const double tb = std::atan2(b.y, b.x);
    const double sweep = wrap_angle(tb - ta);
    // A segment passing (nearly) through the sensor can subtend up to pi; test every beam.
    if (std::abs(sweep) > kPi - 1e-6 || a.norm() < 1e-12 || b.norm() < 1e-12) {
      cast_range(0, spec.beam_count - 1, a, b);
      continue;
    }
    // Angular interval [lo, hi] covered by the segment, padded by one beam; exact
    // intersection decides the borderline beams.
    const double lo = (sweep >= 0.0 ? ta : tb) - spec.increment;
    const double hi = lo + std::abs(sweep) + 2.0 * spec.increment;
    cast_range(index_ceil(std::max(lo, spec.angle_min)), index_floor(std::min(hi, spec.angle_max)), a, b);
    if (hi > kPi) cast_range(0, index_floor(hi - 2.0 * kPi), a, b);
    if (lo < -kPi) cast_range(index_ceil(lo + 2.0 * kPi), spec.beam_count - 1, a, b);
  }
  for (double& x : r) x = std::min(x, spec.max_range);
  return scan;
}

Scan combine_min(const Scan& a, const Scan& b) {
  if (!(a.spec == b.spec) || a.ranges.size() != b.ranges.size()) {
    throw std::invalid_argument("combine_min: scan specs differ");
  }
  Scan out = a;
  for (std::size_t k = 0; k < out.ranges.size(); ++k) out.ranges[k] = std::min(a.ranges[k], b.ranges[k]);
  return out;
}

}  // namespace lfh
