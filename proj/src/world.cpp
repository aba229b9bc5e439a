#include "lfh/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lfh {

void Footprint::validate() const {
  if (!(length > 0.0) || !(half_width > 0.0)) {
    throw std::invalid_argument("footprint dimensions must be positive");
  }
}

OccupancyGrid::OccupancyGrid(double resolution, int width, int height, Pose2D origin,
                             std::vector<std::uint8_t> cells)
    : resolution_(resolution), width_(width), height_(height), origin_(origin), cells_(std::move(cells)) {
  if (!(resolution_ > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (width_ < 0 || height_ < 0) throw std::invalid_argument("grid dimensions must be non-negative");
  if (cells_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw std::invalid_argument("cell array size does not match grid dimensions");
  }
}

std::optional<CellIndex> OccupancyGrid::cell_of(Point2 p) const {
  const double fx = (p.x - origin_.x) / resolution_;
  const double fy = (p.y - origin_.y) / resolution_;
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) return std::nullopt;
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](auto c) { return c != 0; }));
}

OccupancyGrid grid_from_rects(std::span<const Rect> rects, double resolution, double extent_w,
                              double extent_h) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (!(extent_w > 0.0) || !(extent_h > 0.0)) throw std::invalid_argument("extent must be positive");
  // Tolerate extents that are a whole number of cells up to rounding noise.
  const int width = static_cast<int>(std::ceil(extent_w / resolution - 1e-9));
  const int height = static_cast<int>(std::ceil(extent_h / resolution - 1e-9));
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  OccupancyGrid probe(resolution, width, height, Pose2D{}, std::vector<std::uint8_t>(cells.size(), 0));

  for (const Rect& r : rects) {
    if (!(r.x1 >= r.x0) || !(r.y1 >= r.y0)) throw std::invalid_argument("rectangle corners are not ordered");
    // Candidate cells: centers within [x0, x1].
    const int ix0 = std::max(0, static_cast<int>(std::floor(r.x0 / resolution - 0.5)));
    const int ix1 = std::min(width - 1, static_cast<int>(std::ceil(r.x1 / resolution - 0.5)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(r.y0 / resolution - 0.5)));
    const int iy1 = std::min(height - 1, static_cast<int>(std::ceil(r.y1 / resolution - 0.5)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        if (r.contains(probe.cell_center(ix, iy))) cells[probe.index(ix, iy)] = 1;
      }
    }
  }
  return OccupancyGrid(resolution, width, height, Pose2D{}, std::move(cells));
}

bool footprint_collides(const OccupancyGrid& grid, const Pose2D& pose, const Footprint& fp) {
  if (!grid.contains(pose.position())) return true;
  const double reach = std::hypot(fp.half_length(), fp.half_width);
  const double res = grid.resolution();
  const Pose2D& o = grid.origin();
  const int ix0 = std::max(0, static_cast<int>(std::floor((pose.x - reach - o.x) / res - 0.5)));
  const int ix1 = std::min(grid.width() - 1, static_cast<int>(std::ceil((pose.x + reach - o.x) / res - 0.5)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((pose.y - reach - o.y) / res - 0.5)));
  const int iy1 = std::min(grid.height() - 1, static_cast<int>(std::ceil((pose.y + reach - o.y) / res - 0.5)));
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (grid.occupied(ix, iy) && fp.contains_local(pose.to_local(grid.cell_center(ix, iy)))) return true;
    }
  }
  return false;
}

double clearance(const OccupancyGrid& grid, Point2 p) {
  if (grid.width() == 0 || grid.height() == 0) return std::numeric_limits<double>::infinity();
  const double res = grid.resolution();
  const Pose2D& o = grid.origin();
  // Search square rings of cells around the query, stopping once no unvisited ring can
  // hold a closer center.
  const int cx = static_cast<int>(std::floor((p.x - o.x) / res));
  const int cy = static_cast<int>(std::floor((p.y - o.y) / res));
  const int max_ring = std::max({std::abs(cx), std::abs(cy), std::abs(grid.width() - 1 - cx),
                                 std::abs(grid.height() - 1 - cy)});
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](int ix, int iy) {
    if (!grid.in_bounds(ix, iy) || !grid.occupied(ix, iy)) return;
    best = std::min(best, distance(p, grid.cell_center(ix, iy)));
  };
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Every center in ring k is at least (k - 1) * res away from the query.
    if ((ring - 1) * res > best) break;
    if (ring == 0) {
      visit(cx, cy);
      continue;
    }
    for (int d = -ring; d <= ring; ++d) {
      visit(cx + d, cy - ring);
      visit(cx + d, cy + ring);
    }
    for (int d = -ring + 1; d <= ring - 1; ++d) {
      visit(cx - ring, cy + d);
      visit(cx + ring, cy + d);
    }
  }
  return best;
}

Course Course::build(std::vector<Rect> rects, double resolution, double extent_w, double extent_h,
                     Pose2D start, Pose2D goal, const Footprint& fp) {
  Course c;
  c.grid = grid_from_rects(rects, resolution, extent_w, extent_h);
  c.resolution = resolution;
  c.extent_w = extent_w;
  c.extent_h = extent_h;
  c.rects = std::move(rects);
  c.start = start;
  c.goal = goal;
  if (footprint_collides(c.grid, start, fp)) throw std::invalid_argument("course start pose is in collision");
  if (footprint_collides(c.grid, goal, fp)) throw std::invalid_argument("course goal pose is in collision");
  return c;
}

}  // namespace lfh
