#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "lfh/globalplan.hpp"

using namespace lfh;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense O(n^2) Dijkstra with the same move rules as the planner: 8 neighbors, diagonals
// only when both side cells are free.
double dijkstra_cost(const InflatedGrid& map, CellIndex s, CellIndex g) {
  const OccupancyGrid& grid = map.grid();
  const int w = grid.width(), h = grid.height();
  std::vector<double> d(static_cast<std::size_t>(w * h), kInf);
  std::vector<bool> done(d.size(), false);
  d[grid.index(s.ix, s.iy)] = 0.0;
  for (;;) {
    std::size_t u = d.size();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!done[i] && d[i] < kInf && (u == d.size() || d[i] < d[u])) u = i;
    if (u == d.size()) return kInf;
    done[u] = true;
    const int ux = static_cast<int>(u) % w, uy = static_cast<int>(u) / w;
    if (ux == g.ix && uy == g.iy) return d[u];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int vx = ux + dx, vy = uy + dy;
        if (!grid.in_bounds(vx, vy) || map.blocked(vx, vy)) continue;
        if (dx != 0 && dy != 0 && (map.blocked(ux + dx, uy) || map.blocked(ux, uy + dy))) continue;
        const double c = d[u] + ((dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0);
        double& dv = d[grid.index(vx, vy)];
        dv = std::min(dv, c);
      }
  }
}

Pose2D at_cell(const OccupancyGrid& g, int ix, int iy) {
  const Point2 c = g.cell_center(ix, iy);
  return {c.x, c.y, 0.0};
}

void expect_valid_path(const InflatedGrid& map, const GridPath& p) {
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < p.cells.size(); ++i) {
    const int dx = p.cells[i + 1].ix - p.cells[i].ix, dy = p.cells[i + 1].iy - p.cells[i].iy;
    ASSERT_LE(std::max(std::abs(dx), std::abs(dy)), 1);
    ASSERT_FALSE(map.blocked(p.cells[i + 1].ix, p.cells[i + 1].iy));
    cost += (dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0;
  }
  EXPECT_NEAR(cost, p.cost, 1e-9);
}

std::vector<double> clearance_oracle(const OccupancyGrid& g, double cap) {
  std::vector<double> out(g.cells().size(), cap);
  for (int iy = 0; iy < g.height(); ++iy)
    for (int ix = 0; ix < g.width(); ++ix)
      out[g.index(ix, iy)] = std::min(cap, clearance(g, g.cell_center(ix, iy)));
  return out;
}

}  // namespace

TEST(PlanGlobal, StraightLineOnEmptyGrid) {
  const OccupancyGrid g = grid_from_rects({}, 0.1, 2.0, 1.0);
  const GridPath p = plan_global(g, at_cell(g, 3, 5), at_cell(g, 13, 5), 0.0);
  EXPECT_EQ(p.cells.size(), 11u);
  EXPECT_NEAR(p.cost, 10.0, 1e-12);
  EXPECT_EQ(p.cells.front(), (CellIndex{3, 5}));
  EXPECT_EQ(p.cells.back(), (CellIndex{13, 5}));
}

TEST(PlanGlobal, WalledOffGoalHasNoPath) {
  const std::vector<Rect> r{{1.0, 0.0, 1.1, 1.0}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 2.0, 1.0);
  EXPECT_THROW(plan_global(g, Pose2D(0.5, 0.5, 0), Pose2D(1.5, 0.5, 0), 0.0), NoPathError);
  EXPECT_THROW(plan_global(g, Pose2D(1.05, 0.5, 0), Pose2D(1.5, 0.5, 0), 0.0), NoPathError);  // start blocked
}

TEST(PlanGlobal, LShapedCorridorMatchesDijkstra) {
  // Solid block with an L-shaped passage carved out.
  const std::vector<Rect> r{{0.0, 0.6, 1.4, 2.0}, {1.0, 0.0, 2.0, 0.2}, {0.0, 0.0, 0.2, 0.6}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 2.0, 2.0);
  const InflatedGrid map(g, 0.05);
  const Pose2D s(0.4, 0.4, 0.0), goal(1.7, 1.8, 0.0);
  const GridPath p = plan_global(map, s, goal);
  expect_valid_path(map, p);
  EXPECT_NEAR(p.cost, dijkstra_cost(map, *g.cell_of(s.position()), *g.cell_of(goal.position())), 1e-9);
}

TEST(PlanGlobal, RandomGridsMatchDijkstra) {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution occ(0.25);
  std::uniform_int_distribution<int> cell(0, 29);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::uint8_t> cells(30 * 30);
    for (auto& c : cells) c = occ(rng);
    const OccupancyGrid g(0.1, 30, 30, Pose2D(), cells);
    const InflatedGrid map(g, 0.0);
    const CellIndex s{cell(rng), cell(rng)}, t{cell(rng), cell(rng)};
    if (map.blocked(s.ix, s.iy) || map.blocked(t.ix, t.iy)) continue;
    const double want = dijkstra_cost(map, s, t);
    if (std::isinf(want)) {
      EXPECT_THROW(plan_global(map, at_cell(g, s.ix, s.iy), at_cell(g, t.ix, t.iy)), NoPathError);
      continue;
    }
    const GridPath p = plan_global(map, at_cell(g, s.ix, s.iy), at_cell(g, t.ix, t.iy));
    expect_valid_path(map, p);
    EXPECT_NEAR(p.cost, want, 1e-9);
    ++compared;
  }
  EXPECT_GT(compared, 20);
}

TEST(PlanGlobal, DeterministicTies) {
  const OccupancyGrid g = grid_from_rects({}, 0.1, 3.0, 3.0);
  const GridPath a = plan_global(g, at_cell(g, 2, 2), at_cell(g, 20, 9), 0.0);
  const GridPath b = plan_global(g, at_cell(g, 2, 2), at_cell(g, 20, 9), 0.0);
  EXPECT_EQ(a.cells, b.cells);
}

TEST(PlanGlobal, PenaltyPullsPathToTheMiddle) {
  // A 1 m wide corridor: without a penalty the straight path hugs the start row; with the
  // clearance penalty it moves towards the center line.
  const std::vector<Rect> r{{0.0, 0.0, 4.0, 0.5}, {0.0, 1.5, 4.0, 2.0}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 4.0, 2.0);
  const InflatedGrid map(g, 0.0);
  std::vector<double> pen = clearance_map(g, 0.5);
  for (double& p : pen) p = 2.0 * (1.0 - p / 0.5);
  const Pose2D s(0.3, 0.65, 0.0), goal(3.7, 0.65, 0.0);
  const GridPath plain = plan_global(map, s, goal);
  const GridPath centered = plan_global(map, s, goal, pen);
  auto max_y = [&](const GridPath& p) {
    double y = 0.0;
    for (const CellIndex& c : p.cells) y = std::max(y, g.cell_center(c.ix, c.iy).y);
    return y;
  };
  EXPECT_NEAR(max_y(plain), 0.675, 1e-9);
  EXPECT_GT(max_y(centered), 0.9);
  std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(plan_global(map, s, goal, wrong), std::invalid_argument);
}

TEST(InflatedGrid, BlocksWithinRadius) {
  std::vector<std::uint8_t> cells(21 * 21, 0);
  cells[10 * 21 + 10] = 1;
  const OccupancyGrid g(0.1, 21, 21, Pose2D(), cells);
  const InflatedGrid m(g, 0.2);
  EXPECT_TRUE(m.blocked(12, 10));
  EXPECT_TRUE(m.blocked(11, 11));
  EXPECT_FALSE(m.blocked(12, 12));  // 0.283 m away
  EXPECT_FALSE(m.blocked(13, 10));
  EXPECT_THROW(InflatedGrid(g, -0.1), std::invalid_argument);
}

TEST(ClearanceMap, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  std::bernoulli_distribution occ(0.03);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::uint8_t> cells(50 * 40);
    for (auto& c : cells) c = occ(rng);
    const OccupancyGrid g(0.05, 50, 40, Pose2D(), cells);
    const std::vector<double> got = clearance_map(g, 0.6), want = clearance_oracle(g, 0.6);
    int mismatched = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      // Propagated nearest seeds never undercut the true distance and are rarely off.
      EXPECT_GE(got[i], want[i] - 1e-12);
      EXPECT_LE(got[i], want[i] + 0.05);
      mismatched += std::abs(got[i] - want[i]) > 1e-12;
    }
    EXPECT_LT(mismatched, static_cast<int>(got.size() / 100));
  }
  EXPECT_THROW(clearance_map(grid_from_rects({}, 0.1, 1, 1), 0.0), std::invalid_argument);
}

TEST(ClearanceMap, EmptyGridIsCapped) {
  for (double d : clearance_map(grid_from_rects({}, 0.1, 1.0, 1.0), 0.4)) EXPECT_EQ(d, 0.4);
}

TEST(ArtificialWaypoints, AlongTheRobotBody) {
  std::vector<Point2> path;
  for (int i = 0; i < 30; ++i) path.push_back({0.05 * i, 0.0});
  const auto out = inject_artificial_waypoints(path, Pose2D(), Footprint{});
  ASSERT_EQ(out.size(), 30u);
  EXPECT_NEAR(out[0].x, -0.21, 1e-15);
  EXPECT_NEAR(out[9].x, 0.21, 1e-15);
  for (int k = 0; k < 10; ++k) {
    EXPECT_NEAR(out[k].x, -0.21 + 0.42 * k / 9, 1e-15);
    EXPECT_EQ(out[k].y, 0.0);
  }
  for (std::size_t i = 10; i < 30; ++i) EXPECT_EQ(out[i], path[i]);

  const auto up = inject_artificial_waypoints(path, Pose2D(1, 1, kPi / 2), Footprint{});
  EXPECT_NEAR(up[0].x, 1.0, 1e-12);
  EXPECT_NEAR(up[0].y, 0.79, 1e-12);
  EXPECT_NEAR(up[9].y, 1.21, 1e-12);
}

TEST(ArtificialWaypoints, ShortPathKeepsGoal) {
  const std::vector<Point2> path{{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}, {0.9, 0.4}};
  const auto out = inject_artificial_waypoints(path, Pose2D(), Footprint{});
  ASSERT_EQ(out.size(), 11u);
  EXPECT_EQ(out.back(), path.back());
  EXPECT_THROW(inject_artificial_waypoints({}, Pose2D(), Footprint{}), std::invalid_argument);
}

TEST(Savgol, ConstantUnchanged) {
  const std::vector<double> c(40, 2.5);
  for (double x : savgol_filter(c)) EXPECT_NEAR(x, 2.5, 1e-12);
}

TEST(Savgol, ReproducesCubics) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    std::vector<double> v;
    for (int i = 0; i < 60; ++i) {
      const double t = 0.1 * i - 3.0;
      v.push_back(a + b * t + c * t * t + d * t * t * t);
    }
    const auto out = savgol_filter(v, 19, 3);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(out[i], v[i], 1e-9);
  }
}

TEST(Savgol, ReducesZigzag) {
  std::vector<Point2> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({0.05 * i, (i % 2 ? 0.1 : -0.1)});
  const auto out = savgol_filter(pts);
  double worst = 0.0;
  for (const Point2& p : out) worst = std::max(worst, std::abs(p.y));
  EXPECT_LT(worst, 0.1);
}

TEST(Savgol, Linear) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> p(45), q(45), mix(45);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = u(rng);
    q[i] = u(rng);
    mix[i] = 2.0 * p[i] - 0.7 * q[i];
  }
  const auto fp = savgol_filter(p), fq = savgol_filter(q), fm = savgol_filter(mix);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(fm[i], 2.0 * fp[i] - 0.7 * fq[i], 1e-12);
}

TEST(Savgol, ShortInputsShrinkTheWindow) {
  const std::vector<double> v{0.0, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0};  // 8 points -> window 7
  const auto out = savgol_filter(v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(out[i], v[i], 1e-9);  // quadratic survives
  const std::vector<double> two{1.0, 3.0};
  EXPECT_EQ(savgol_filter(two).size(), 2u);
  EXPECT_THROW(savgol_filter(v, 5, 5), std::invalid_argument);
  EXPECT_THROW(savgol_filter(v, 4, 1), std::invalid_argument);
}

TEST(LocalGoal, StraightPath) {
  const SmoothPath path({{-1, 0}, {5, 0}});
  const Point2 a = local_goal(path, Pose2D(), 1.0);
  EXPECT_NEAR(a.x, 1.0, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  const Point2 b = local_goal(path, Pose2D(0, 0, kPi / 2), 1.0);
  EXPECT_NEAR(b.x, 0.0, 1e-9);
  EXPECT_NEAR(b.y, -1.0, 1e-9);
  const Point2 c = local_goal(path, Pose2D(4.7, 0, 0), 1.0);
  EXPECT_NEAR(c.x, 0.3, 1e-12);
}

TEST(LocalGoal, ArcLengthProperty) {
  std::vector<Point2> pts;
  for (int i = 0; i <= 60; ++i) pts.push_back({0.05 * i, 0.3 * std::sin(0.1 * i)});
  const SmoothPath path(pts);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(0, path.length()), off(-0.1, 0.1), d(0.1, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Point2 p = path.at(s(rng)) + Point2{off(rng), off(rng)};
    const Pose2D pose(p.x, p.y, off(rng));
    const double dist = d(rng);
    const auto proj = path.project(p);
    const Point2 goal = pose.to_world(local_goal(path, pose, dist));
    const auto gp = path.project(goal);
    EXPECT_NEAR(gp.distance, 0.0, 1e-9);
    EXPECT_NEAR(gp.s - proj.s, std::min(dist, path.length() - proj.s), 1e-9);
  }
}

TEST(TangentError, Examples) {
  const SmoothPath px({{0, 0}, {2, 0}}), py({{0, 0}, {0, 2}}), pnx({{2, 0}, {0, 0}});
  EXPECT_NEAR(tangent_error(px, Pose2D(0.5, 0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(tangent_error(py, Pose2D(0, 0.5, 0)), kPi / 2, 1e-15);
  EXPECT_NEAR(tangent_error(pnx, Pose2D(0.5, 0, 0)), kPi, 1e-15);
}

TEST(SmoothPath, RejectsDegenerate) {
  EXPECT_THROW(SmoothPath({{0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_EQ(SmoothPath({{0, 0}, {0, 0}, {1, 0}}).size(), 2u);
}

TEST(GlobalPlanner, FallsBackDownTheLadder) {
  // Gap of 0.3 m: blocked at 0.165 inflation, open at 0.1.
  const std::vector<Rect> r{{1.0, 0.0, 1.2, 0.85}, {1.0, 1.15, 1.2, 2.0}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 3.0, 2.0);
  const GlobalPlanner planner(g, {0.165, 0.1, 0.0});
  const auto res = planner.plan(Pose2D(0.4, 1.0, 0), Pose2D(2.6, 1.0, 0));
  EXPECT_EQ(res.inflation, 0.1);
  // Smoothing moves the endpoints slightly.
  EXPECT_NEAR(res.path.points().front().x, 0.4, 0.02);
  EXPECT_NEAR(res.path.points().back().x, 2.6, 0.02);
  EXPECT_NEAR(res.plain.points().front().x, 0.4, 0.02);
  const GlobalPlanner strict(g, {0.165});
  EXPECT_THROW(strict.plan(Pose2D(0.4, 1.0, 0), Pose2D(2.6, 1.0, 0)), NoPathError);
  EXPECT_THROW(GlobalPlanner(g, {}), std::invalid_argument);
  EXPECT_THROW(GlobalPlanner(g, {0.1}, ClearanceCost{-1.0, 0.5}), std::invalid_argument);
}
