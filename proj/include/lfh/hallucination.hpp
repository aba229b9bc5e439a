#pragma once

#include <span>
#include <vector>

#include "lfh/geometry.hpp"
#include "lfh/lidar.hpp"

namespace lfh {

/// Default lateral distance from the centerline to the hallucinated walls.
inline constexpr double kCorridorOffset = 0.18;

/// The most constrained free space around a centerline: two offset walls, open at both ends.
///
/// left_wall[i] / right_wall[i] sit exactly `offset` from centerline[i] along the local
/// normal. On curves tighter than the offset the inner wall folds back over the centerline;
/// those vertices are flagged inactive (they lie inside the free space) and do not take part
/// in ray casting.
struct Corridor {
  std::vector<Point2> centerline;
  std::vector<Point2> left_wall;
  std::vector<Point2> right_wall;
  std::vector<bool> left_active;
  std::vector<bool> right_active;
  double offset = kCorridorOffset;

  /// Wall segments whose endpoints are both active.
  std::vector<Segment> wall_segments() const;
  /// Distance from `p` to the centerline polyline.
  double distance_to_centerline(Point2 p) const;
  /// Smallest distance from `p` to any active wall segment (+inf without walls).
  double distance_to_walls(Point2 p) const;
};

/// Offsets a centerline to both sides using finite-difference tangents (central inside,
/// one-sided at the ends). Throws std::invalid_argument for fewer than two points or
/// repeated consecutive points.
Corridor corridor_from_centerline(std::span<const Point2> points, double offset = kCorridorOffset);

/// Ray casts the corridor walls from `pose`. Beams leaving through the open ends read
/// max_range. Throws std::invalid_argument when the pose is not inside the corridor.
Scan hallucinate_scan(const Corridor& corridor, const Pose2D& pose, const ScanSpec& spec);

/// Deployment-time hallucination: the corridor around a smoothed global path, merged with
/// the real scan by element-wise minimum.
Scan deploy_hallucinate(std::span<const Point2> path, const Pose2D& pose, const ScanSpec& spec, const Scan& real,
                        double offset = kCorridorOffset);

/// Whether a disc of radius `half_width` centered at `pose` stays clear of the corridor walls.
bool corridor_contains(const Corridor& corridor, const Pose2D& pose, double half_width);

}  // namespace lfh
