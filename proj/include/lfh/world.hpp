#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lfh/geometry.hpp"

namespace lfh {

/// Rectangular robot body centered on the pose origin, long axis along the heading.
struct Footprint {
  double length = 0.42;
  double half_width = 0.165;

  void validate() const;
  double half_length() const { return 0.5 * length; }
  /// Whether a point given in the robot frame lies inside the body (closed set).
  bool contains_local(Point2 p) const {
    return std::abs(p.x) <= half_length() && std::abs(p.y) <= half_width;
  }
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in meters.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct CellIndex {
  int ix = 0;
  int iy = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Boolean occupancy grid. Cell (ix, iy) covers
/// [origin.x + ix*res, origin.x + (ix+1)*res) x [origin.y + iy*res, ...), its
/// occupancy is represented by the cell center.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(double resolution, int width, int height, Pose2D origin,
                std::vector<std::uint8_t> cells);

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Pose2D& origin() const { return origin_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  bool in_bounds(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width_ && iy < height_; }
  bool occupied(int ix, int iy) const { return cells_[index(ix, iy)] != 0; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(ix);
  }

  Point2 cell_center(int ix, int iy) const {
    return {origin_.x + (ix + 0.5) * resolution_, origin_.y + (iy + 0.5) * resolution_};
  }
  /// Cell containing a world point, or nullopt when outside the grid.
  std::optional<CellIndex> cell_of(Point2 p) const;
  bool contains(Point2 p) const { return cell_of(p).has_value(); }

  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }
  std::size_t occupied_count() const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  double resolution_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  Pose2D origin_;
  std::vector<std::uint8_t> cells_;
};

/// Rasterizes a union of rectangles over [0, extent_w] x [0, extent_h]. A cell is
/// occupied iff its center lies inside (or on the border of) any rectangle.
OccupancyGrid grid_from_rects(std::span<const Rect> rects, double resolution, double extent_w,
                              double extent_h);

/// True iff any occupied cell center lies inside the footprint placed at `pose`.
/// A pose outside the grid counts as a collision.
bool footprint_collides(const OccupancyGrid& grid, const Pose2D& pose, const Footprint& fp);

/// Euclidean distance from `p` to the nearest occupied cell center, +inf when the grid is empty.
double clearance(const OccupancyGrid& grid, Point2 p);

/// An evaluation course: the source geometry is kept alongside the rasterized grid so that
/// the course file round-trips exactly.
struct Course {
  double resolution = 0.05;
  double extent_w = 0.0;
  double extent_h = 0.0;
  std::vector<Rect> rects;
  Pose2D start;
  Pose2D goal;
  OccupancyGrid grid;

  /// Rasterizes `rects` and checks that start and goal footprints are collision-free.
  static Course build(std::vector<Rect> rects, double resolution, double extent_w, double extent_h,
                      Pose2D start, Pose2D goal, const Footprint& fp = {});
};

}  // namespace lfh
