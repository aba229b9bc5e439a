#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "lfh/geometry.hpp"
#include "lfh/world.hpp"

namespace lfh {

/// 8-connected cell sequence from the start cell to the goal cell.
struct GridPath {
  std::vector<CellIndex> cells;
  double cost = 0.0;  // sum of unit / sqrt(2) step costs
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Occupancy dilated by a metric radius: a cell is blocked when some occupied cell center
/// lies within `inflation` of its center.
class InflatedGrid {
 public:
  InflatedGrid(const OccupancyGrid& grid, double inflation);

  const OccupancyGrid& grid() const { return *grid_; }
  double inflation() const { return inflation_; }
  bool blocked(int ix, int iy) const { return blocked_[grid_->index(ix, iy)] != 0; }

 private:
  const OccupancyGrid* grid_;
  double inflation_;
  std::vector<std::uint8_t> blocked_;
};

/// A* with the octile heuristic; ties are broken by (f, h, cell index) so results are
/// deterministic. Throws NoPathError when start or goal is blocked or unreachable.
/// A non-empty `penalty` (one value >= 0 per cell) scales each step by
/// 1 + mean penalty of its two cells.
GridPath plan_global(const InflatedGrid& map, const Pose2D& start, const Pose2D& goal,
                     std::span<const double> penalty = {});
GridPath plan_global(const OccupancyGrid& grid, const Pose2D& start, const Pose2D& goal, double inflation);

/// Distance from each cell center to the nearest occupied cell center, capped at `cap`.
/// Nearest seeds are propagated over 8-neighbors, which is exact up to rare ties.
std::vector<double> clearance_map(const OccupancyGrid& grid, double cap);

/// Step penalty weight * (1 - clearance / cap): pulls paths towards the middle of passages.
struct ClearanceCost {
  double weight = 0.0;  // 0 disables
  double cap = 0.5;     // meters
};

/// Cell centers of a grid path in meters.
std::vector<Point2> path_points(const OccupancyGrid& grid, const GridPath& path);

inline constexpr int kArtificialWaypoints = 10;

/// Replaces the first ten waypoints with ten points spread evenly from the rear to the front
/// bumper midpoints of the robot at `pose`. Paths of ten points or fewer keep only their
/// final point after the artificial ones.
std::vector<Point2> inject_artificial_waypoints(std::span<const Point2> path, const Pose2D& pose,
                                                const Footprint& fp);

/// Polyline with a cached cumulative arc length.
class SmoothPath {
 public:
  /// Consecutive duplicates are dropped; at least two distinct points must remain.
  explicit SmoothPath(std::vector<Point2> points);

  const std::vector<Point2>& points() const { return points_; }
  const std::vector<double>& arc_length() const { return arc_; }
  double length() const { return arc_.back(); }
  std::size_t size() const { return points_.size(); }

  struct Projection {
    std::size_t segment = 0;  // index of the segment's first vertex
    Point2 point;
    double s = 0.0;  // arc length at the projected point
    double distance = 0.0;
  };
  /// Closest point on the polyline.
  Projection project(Point2 p) const;
  /// Point at arc length s (clamped to the path).
  Point2 at(double s) const;
  /// Heading of the segment containing arc length s.
  double tangent_at_segment(std::size_t segment) const;

 private:
  std::vector<Point2> points_;
  std::vector<double> arc_;
};

inline constexpr int kSavgolWindow = 19;
inline constexpr int kSavgolOrder = 3;

/// Savitzky-Golay smoothing of each coordinate: the value of the least-squares polynomial
/// of degree `polyorder` fitted over the window, evaluated at the sample. Samples within
/// half a window of either end use the first / last full window. Inputs shorter than the
/// window shrink it to the largest odd length that fits (and the order to at most
/// window - 1). Throws std::invalid_argument when polyorder >= window.
std::vector<Point2> savgol_filter(std::span<const Point2> points, int window = kSavgolWindow,
                                  int polyorder = kSavgolOrder);
std::vector<double> savgol_filter(std::span<const double> values, int window = kSavgolWindow,
                                  int polyorder = kSavgolOrder);
SmoothPath smooth_savgol(std::span<const Point2> points, int window = kSavgolWindow, int polyorder = kSavgolOrder);

/// Global planning over a ladder of inflation radii tried in order, followed by optional
/// artificial waypoints and Savitzky-Golay smoothing.
class GlobalPlanner {
 public:
  GlobalPlanner(const OccupancyGrid& grid, std::vector<double> inflation_ladder, ClearanceCost cost = {});

  struct Result {
    SmoothPath path;
    double inflation;
    // Same search result smoothed without artificial waypoints. Those always point along
    // the current heading, so the tangent error is measured on this one.
    SmoothPath plain;
  };
  /// With a footprint, the first waypoints of `path` are replaced by artificial ones along
  /// the robot body. Throws NoPathError when no inflation level admits a path.
  Result plan(const Pose2D& pose, const Pose2D& goal, const Footprint* fp = nullptr) const;

  const OccupancyGrid& grid() const { return *grid_; }

 private:
  const OccupancyGrid* grid_;
  std::vector<InflatedGrid> levels_;
  std::vector<double> penalty_;
};

/// Point `dist` meters further along the path than the projection of `pose`, in the robot
/// frame. Returns the final path point when less than `dist` remains.
Point2 local_goal(const SmoothPath& path, const Pose2D& pose, double dist = 1.0);

/// Path tangent at the projected pose minus the robot heading, wrapped into (-pi, pi].
double tangent_error(const SmoothPath& path, const Pose2D& pose);

}  // namespace lfh
