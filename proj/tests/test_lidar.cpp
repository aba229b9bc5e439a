#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "lfh/lidar.hpp"
#include "lfh/world.hpp"

using namespace lfh;

namespace {

const ScanSpec kSpec;

// Ray / segment intersection by solving o + t d = a + s (b - a).
double ray_hit(Point2 o, Point2 d, const Segment& seg) {
  const Point2 e = seg.b - seg.a;
  const double den = cross(d, e);
  if (std::abs(den) < 1e-15) return std::numeric_limits<double>::infinity();
  const Point2 w = seg.a - o;
  const double t = cross(w, e) / den;
  const double s = cross(w, d) / den;
  if (t < 0.0 || s < 0.0 || s > 1.0) return std::numeric_limits<double>::infinity();
  return t;
}

Scan scan_oracle(std::span<const Segment> walls, const Pose2D& pose, const ScanSpec& spec) {
  Scan s = Scan::empty(spec);
  for (int k = 0; k < spec.beam_count; ++k) {
    const double a = pose.psi() + spec.beam_angle(k);
    const Point2 d{std::cos(a), std::sin(a)};
    double best = spec.max_range;
    for (const Segment& w : walls) best = std::min(best, ray_hit(pose.position(), d, w));
    s.ranges[static_cast<std::size_t>(k)] = best;
  }
  return s;
}

std::vector<Segment> rect_edges(const Rect& r) {
  return {{{r.x0, r.y0}, {r.x1, r.y0}}, {{r.x1, r.y0}, {r.x1, r.y1}}, {{r.x1, r.y1}, {r.x0, r.y1}},
          {{r.x0, r.y1}, {r.x0, r.y0}}};
}

Scan random_scan(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.1, 5.0);
  Scan s = Scan::empty(kSpec);
  for (auto& x : s.ranges) x = r(rng);
  return s;
}

}  // namespace

TEST(ScanSpec, DefaultBeamCount) {
  EXPECT_EQ(kSpec.beam_count, 2095);
  EXPECT_EQ(static_cast<int>(std::floor((kSpec.angle_max - kSpec.angle_min) / kSpec.increment)) + 1, 2095);
  EXPECT_NO_THROW(kSpec.validate());
  ScanSpec bad = kSpec;
  bad.beam_count = 100;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(AngleToBeam, Examples) {
  EXPECT_EQ(angle_to_beam(kSpec.angle_min, kSpec), 0);
  EXPECT_EQ(angle_to_beam(0.0, kSpec), 1047);
  EXPECT_EQ(angle_to_beam(kSpec.angle_max, kSpec), 2094);
  EXPECT_EQ(angle_to_beam(-100.0, kSpec), 0);
  EXPECT_EQ(angle_to_beam(100.0, kSpec), 2094);
}

TEST(AngleToBeam, NearestBeam) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(kSpec.angle_min, kSpec.beam_angle(kSpec.beam_count - 1));
  for (int i = 0; i < 1000; ++i) {
    const double t = ang(rng);
    EXPECT_LE(std::abs(kSpec.beam_angle(angle_to_beam(t, kSpec)) - t), kSpec.increment / 2 + 1e-12);
  }
}

TEST(RaycastGrid, EmptyGridReadsMax) {
  const OccupancyGrid g = grid_from_rects({}, 0.05, 4.0, 4.0);
  const Scan s = raycast_grid(g, Pose2D(2, 2, 0.3), kSpec);
  for (double r : s.ranges) EXPECT_EQ(r, kSpec.max_range);
}

TEST(RaycastGrid, EnclosingSquare) {
  const double res = 0.05;
  // Walls whose inner faces sit 1.0 m from the robot at (2, 2).
  const std::vector<Rect> walls{{0.5, 0.5, 1.0, 3.5}, {3.0, 0.5, 3.5, 3.5}, {0.5, 0.5, 3.5, 1.0}, {0.5, 3.0, 3.5, 3.5}};
  const OccupancyGrid g = grid_from_rects(walls, res, 4.0, 4.0);
  const Scan s = raycast_grid(g, Pose2D(2, 2, 0), kSpec);
  EXPECT_NEAR(s[angle_to_beam(0.0, kSpec)], 1.0, res);
  EXPECT_NEAR(s[angle_to_beam(kPi / 2, kSpec)], 1.0, res);
  EXPECT_NEAR(s[angle_to_beam(-kPi / 2, kSpec)], 1.0, res);
}

TEST(RaycastGrid, HalfPlaneParallelBeam) {
  const std::vector<Rect> r{{1.0, -10.0, 12.0, 10.0}};
  std::vector<std::uint8_t> cells;
  const OccupancyGrid base = grid_from_rects(r, 0.05, 12.0, 10.0);
  // Shift so the robot at (0, 0) sits in the middle of the grid.
  const OccupancyGrid g(0.05, base.width(), base.height(), Pose2D(-6.0, -5.0, 0.0), base.cells());
  ASSERT_TRUE(g.contains({0.0, 0.0}));
  std::vector<std::uint8_t> occ(g.cells().size(), 0);
  for (int iy = 0; iy < g.height(); ++iy)
    for (int ix = 0; ix < g.width(); ++ix) occ[g.index(ix, iy)] = g.cell_center(ix, iy).x >= 1.0;
  const OccupancyGrid hp(0.05, g.width(), g.height(), g.origin(), occ);
  const Scan s = raycast_grid(hp, Pose2D(0, 0, 0), kSpec);
  EXPECT_EQ(s[angle_to_beam(kPi / 2, kSpec)], kSpec.max_range);
  EXPECT_NEAR(s[angle_to_beam(0.0, kSpec)], 1.0, 0.05);
}

TEST(RaycastGrid, OutsideGridThrows) {
  const OccupancyGrid g = grid_from_rects({}, 0.05, 1.0, 1.0);
  EXPECT_THROW(raycast_grid(g, Pose2D(-1, 0.5, 0), kSpec), std::invalid_argument);
}

TEST(RaycastGrid, AgreesWithSegmentsOnRasterizedWalls) {
  const double res = 0.05;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> cell(2, 76);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rect> rects;
    std::vector<Segment> segs;
    for (int i = 0; i < 6; ++i) {
      const int x0 = cell(rng), y0 = cell(rng);
      const Rect r{x0 * res, y0 * res, (x0 + 3) * res, (y0 + 3) * res};
      rects.push_back(r);
      for (const Segment& s : rect_edges(r)) segs.push_back(s);
    }
    const OccupancyGrid g = grid_from_rects(rects, res, 4.0, 4.0);
    Pose2D pose(2.0 + 0.013, 2.0 - 0.007, 0.4);
    if (clearance(g, pose.position()) < 0.1) continue;
    const Scan a = raycast_grid(g, pose, kSpec);
    const Scan b = raycast_segments(segs, pose, kSpec);
    for (int k = 0; k < kSpec.beam_count; ++k) {
      // Beams leaving the grid read max range in the grid; only compare inside it.
      if (b[k] >= 1.9) continue;
      EXPECT_NEAR(a[k], b[k], res) << "beam " << k;
    }
  }
}

TEST(RaycastSegments, NoSegmentsReadsMax) {
  const Scan s = raycast_segments({}, Pose2D(), kSpec);
  for (double r : s.ranges) EXPECT_EQ(r, kSpec.max_range);
}

TEST(RaycastSegments, WallAtOneMeter) {
  const std::vector<Segment> w{{{1, -10}, {1, 10}}};
  const Scan s = raycast_segments(w, Pose2D(), kSpec);
  const int k0 = angle_to_beam(0.0, kSpec), k60 = angle_to_beam(kPi / 3, kSpec);
  EXPECT_NEAR(s[k0], 1.0 / std::cos(kSpec.beam_angle(k0)), 1e-9);
  EXPECT_NEAR(s[k0], 1.0, 1e-5);
  EXPECT_NEAR(s[k60], 1.0 / std::cos(kSpec.beam_angle(k60)), 1e-9);
  EXPECT_NEAR(s[k60], 2.0, 0.01);  // beam k60 is within half an increment of 60 degrees
}

TEST(RaycastSegments, SegmentBeyondRange) {
  const std::vector<Segment> w{{{6, -1}, {6, 1}}};
  EXPECT_EQ(raycast_segments(w, Pose2D(), kSpec)[1047], kSpec.max_range);
}

TEST(RaycastSegments, MatchesIntersectionOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(-4, 4), ang(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Segment> w;
    for (int i = 0; i < 8; ++i) w.push_back({{c(rng), c(rng)}, {c(rng), c(rng)}});
    const Pose2D pose(0.1 * c(rng), 0.1 * c(rng), ang(rng));
    const Scan got = raycast_segments(w, pose, kSpec);
    const Scan want = scan_oracle(w, pose, kSpec);
    for (int k = 0; k < kSpec.beam_count; ++k) ASSERT_NEAR(got[k], want[k], 1e-9) << "beam " << k;
  }
}

TEST(RaycastSegments, SoundAgainstPointsOnTheRay) {
  // A point of a segment lying on beam k's ray bounds that beam's reading.
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> c(-3, 3), t(0, 1);
  std::uniform_int_distribution<int> beam(0, kSpec.beam_count - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = beam(rng);
    const double a = kSpec.beam_angle(k);
    const double r = 0.2 + 4.0 * t(rng);
    const Point2 on{r * std::cos(a), r * std::sin(a)};
    const Point2 dir{c(rng), c(rng)};
    const double f = t(rng);
    const std::vector<Segment> w{{on - f * dir, on + (1 - f) * dir}};
    EXPECT_LE(raycast_segments(w, Pose2D(), kSpec)[k], r + 1e-9);
  }
}

TEST(CombineMin, Examples) {
  ScanSpec two{0.0, 0.003, 0.003, 2, 5.0};
  Scan a{two, {1, 3}}, b{two, {2, 2}};
  EXPECT_EQ(combine_min(a, b).ranges, (std::vector<double>{1, 2}));
  EXPECT_EQ(combine_min(Scan::empty(two), b), b);
  EXPECT_EQ(combine_min(a, a), a);
  EXPECT_THROW(combine_min(a, Scan::empty(kSpec)), std::invalid_argument);
}

TEST(CombineMin, Algebra) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Scan a = random_scan(rng), b = random_scan(rng), c = random_scan(rng);
    EXPECT_EQ(combine_min(a, b), combine_min(b, a));
    EXPECT_EQ(combine_min(combine_min(a, b), c), combine_min(a, combine_min(b, c)));
    EXPECT_EQ(combine_min(a, a), a);
    EXPECT_EQ(combine_min(Scan::empty(kSpec), a), a);
  }
}

TEST(Scan, RangesArePositiveAndBounded) {
  const std::vector<Rect> r{{1.0, 1.0, 1.2, 3.0}, {2.5, 0.5, 3.0, 1.0}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 4.0, 4.0);
  const Scan s = raycast_grid(g, Pose2D(0.5, 0.5, 0.2), kSpec);
  for (double x : s.ranges) {
    EXPECT_TRUE(std::isfinite(x));
    EXPECT_GT(x, 0.0);
    EXPECT_LE(x, kSpec.max_range);
  }
}
