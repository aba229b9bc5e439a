#pragma once

#include <span>
#include <vector>

#include "lfh/geometry.hpp"
#include "lfh/world.hpp"

namespace lfh {

/// Beam layout of the planar LiDAR. Beam k points at angle_min + k * increment in the
/// sensor frame, which coincides with the robot frame.
struct ScanSpec {
  double angle_min = -kPi;
  double angle_max = kPi;
  double increment = 0.003;
  int beam_count = 2095;
  double max_range = 5.0;

  void validate() const;
  double beam_angle(int k) const { return angle_min + k * increment; }
  friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

/// Range readings, clamped to (0, max_range].
struct Scan {
  ScanSpec spec;
  std::vector<double> ranges;

  static Scan empty(const ScanSpec& spec) {
    return {spec, std::vector<double>(static_cast<std::size_t>(spec.beam_count), spec.max_range)};
  }
  double operator[](int k) const { return ranges[static_cast<std::size_t>(k)]; }
  friend bool operator==(const Scan&, const Scan&) = default;
};

struct Segment {
  Point2 a;
  Point2 b;
};

/// Nearest beam for an angle in [angle_min, angle_max], clamped to a valid index.
int angle_to_beam(double theta, const ScanSpec& spec);

/// Casts every beam through the grid (Amanatides-Woo traversal) and reports the distance at
/// which it enters the first occupied cell.
Scan raycast_grid(const OccupancyGrid& grid, const Pose2D& pose, const ScanSpec& spec);

/// Casts every beam against line segments given in the world frame.
Scan raycast_segments(std::span<const Segment> walls, const Pose2D& origin_pose, const ScanSpec& spec);

/// Element-wise minimum of two scans with identical specs.
Scan combine_min(const Scan& a, const Scan& b);

}  // namespace lfh
