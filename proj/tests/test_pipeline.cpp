#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lfh/pipeline.hpp"

using namespace lfh;

namespace {

const ScanSpec kSpec;
const Footprint kFp;

Scan wall_ahead(double dist) {
  // Straight wall x = dist across the whole field of view.
  const std::vector<Segment> w{{{dist, -20.0}, {dist, 20.0}}};
  return raycast_segments(w, Pose2D(), kSpec);
}

Scan box(double margin) {
  const double hl = kFp.half_length() + margin, hw = kFp.half_width + margin;
  const std::vector<Segment> w{{{hl, -hw}, {hl, hw}}, {{-hl, -hw}, {-hl, hw}}, {{-hl, hw}, {hl, hw}}, {{-hl, -hw}, {hl, -hw}}};
  return raycast_segments(w, Pose2D(), kSpec);
}

LocalPolicy constant_policy(Control u) {
  return [u](const PolicyInput&) { return u; };
}

// A 1 m wide corridor along +x from x = 0 to x = 6, walls outside.
OccupancyGrid corridor_world() {
  const std::vector<Rect> r{{0.0, 0.0, 6.0, 0.5}, {0.0, 1.5, 6.0, 2.0}};
  return grid_from_rects(r, 0.05, 6.0, 2.0);
}

}  // namespace

TEST(PerimeterPoints, FortyDistinctPointsOnTheOutline) {
  const auto pts = perimeter_points(kFp);
  ASSERT_EQ(pts.size(), 40u);
  std::set<std::pair<double, double>> unique;
  for (const Point2& p : pts) {
    unique.insert({p.x, p.y});
    const bool on_x = std::abs(std::abs(p.x) - kFp.half_length()) < 1e-12 && std::abs(p.y) <= kFp.half_width + 1e-12;
    const bool on_y = std::abs(std::abs(p.y) - kFp.half_width) < 1e-12 && std::abs(p.x) <= kFp.half_length() + 1e-12;
    EXPECT_TRUE(on_x || on_y);
  }
  EXPECT_EQ(unique.size(), 40u);
  EXPECT_THROW(perimeter_points(kFp, 38), std::invalid_argument);
}

TEST(CollisionCheck, Examples) {
  const SafetyConfig cfg;
  EXPECT_FALSE(collision_check(Plan::constant({0.4, 1.4}, 20), Scan::empty(kSpec), kFp, cfg));
  EXPECT_TRUE(collision_check(Plan::constant({0.4, 0.0}, 20), wall_ahead(kFp.half_length() + 0.1), kFp, cfg));
  EXPECT_FALSE(collision_check(Plan::constant({0.0, 0.0}, 20), box(0.05), kFp, cfg));
}

TEST(CollisionCheck, MatchesSweptFootprintGeometry) {
  // Driving straight at a wall collides exactly when the bumper reaches it.
  const SafetyConfig cfg;
  const double gap = 0.2;
  const Scan s = wall_ahead(kFp.half_length() + gap);
  for (int steps = 1; steps <= 20; ++steps) {
    const double travel = 0.3 * kControlDt * steps;
    if (std::abs(travel - gap) < 1e-3) continue;
    EXPECT_EQ(collision_check(Plan::constant({0.3, 0.0}, steps), s, kFp, cfg), travel > gap) << steps;
  }
}

TEST(EstimateSafety, Extremes) {
  const SafetyConfig cfg;
  EXPECT_EQ(estimate_safety({0.4, 0.3}, Scan::empty(kSpec), kFp, cfg, 1), 1.0);
  EXPECT_EQ(estimate_safety({0.4, 0.0}, wall_ahead(kFp.half_length() + 0.1), kFp, cfg, 1), 0.0);
  EXPECT_EQ(estimate_safety({0.0, 0.0}, box(0.05), kFp, cfg, 1), 1.0);
}

TEST(EstimateSafety, DeterministicPerSeed) {
  const SafetyConfig cfg;
  const Scan s = wall_ahead(0.6);
  EXPECT_EQ(estimate_safety({0.3, 0.2}, s, kFp, cfg, 5), estimate_safety({0.3, 0.2}, s, kFp, cfg, 5));
}

TEST(EstimateSafety, MonotoneUnderObstacleRemoval) {
  const SafetyConfig cfg;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> r(0.25, 1.5), v(0.0, 0.4), w(-1.4, 1.4);
  std::uniform_int_distribution<int> beam(0, kSpec.beam_count - 1);
  for (int scene = 0; scene < 50; ++scene) {
    Scan near = wall_ahead(r(rng) + 0.21);
    for (int k = 0; k < 200; ++k) near.ranges[static_cast<std::size_t>(beam(rng))] = r(rng);
    Scan far = near;
    for (auto& x : far.ranges)
      if (std::bernoulli_distribution(0.3)(rng)) x = kSpec.max_range;
    const Control u{v(rng), w(rng)};
    EXPECT_GE(estimate_safety(u, far, kFp, cfg, 99), estimate_safety(u, near, kFp, cfg, 99));
  }
}

TEST(Modulation, Factors) {
  EXPECT_NEAR(modulation_factor(1.0), 1.491825, 1e-6);
  EXPECT_NEAR(modulation_factor(0.0), 0.548812, 1e-6);
  EXPECT_NEAR(modulation_factor(1.0), std::exp(0.4), 1e-15);
}

TEST(Modulate, DeadbandAndLimits) {
  EXPECT_EQ(modulate({0.2, 0.03}, 0.5).omega, 0.0);
  EXPECT_EQ(modulate({0.2, -0.039}, 1.0).omega, 0.0);
  EXPECT_NEAR(modulate({0.2, 0.05}, 1.0).omega, 0.05 * std::exp(0.4), 1e-15);
  EXPECT_EQ(modulate({0.4, 1.4}, 1.0), (Control{0.4, 1.4}));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> v(0, 0.4), w(-1.4, 1.4), p(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Control u{v(rng), w(rng)};
    const double ps = p(rng);
    const Control m = modulate(u, ps);
    EXPECT_TRUE(Limits{}.admits(m));
    // Straight motion is unaffected by the deadband.
    EXPECT_EQ(modulate({u.v, 0.0}, ps).omega, 0.0);
  }
  EXPECT_THROW(modulate({0.1, 0}, 1.5), std::invalid_argument);
}

TEST(Recovery, StageOneSteersAwayFromWallAhead) {
  // Obstacle only straight ahead: a narrow pillar in front of the bumper.
  Scan s = Scan::empty(kSpec);
  for (int k = angle_to_beam(-0.15, kSpec); k <= angle_to_beam(0.15, kSpec); ++k) s.ranges[static_cast<std::size_t>(k)] = 0.45;
  const SafetyConfig cfg;
  const Control u{0.3, 0.5};
  ASSERT_TRUE(collision_check(Plan::constant(u, cfg.horizon), s, kFp, cfg));
  const RecoveryResult r = recovery(u, s, kFp, cfg);
  EXPECT_EQ(r.stage, 1);
  EXPECT_LT(r.control.v, u.v);
  EXPECT_GT(r.control.omega, u.omega);
  EXPECT_NEAR(r.control.v, u.v * std::pow(0.98, r.iteration), 1e-12);
  EXPECT_FALSE(collision_check(Plan::constant(r.control, cfg.horizon), s, kFp, cfg));
  // Every earlier candidate failed.
  for (int i = 1; i < r.iteration; ++i) {
    const Control c{u.v * std::pow(0.98, i), u.omega * std::pow(1.02, i)};
    EXPECT_TRUE(collision_check(Plan::constant(c, cfg.horizon), s, kFp, cfg));
  }
}

TEST(Recovery, BoxedInBacksUp) {
  const RecoveryResult r = recovery({0.3, 0.2}, box(0.05), kFp);
  EXPECT_EQ(r.stage, 3);
  EXPECT_EQ(r.control, (Control{-0.1, 0.0}));
}

TEST(Recovery, RejectsSafeInput) {
  EXPECT_THROW(recovery({0.3, 0.0}, Scan::empty(kSpec), kFp), std::invalid_argument);
}

TEST(PidTurn, Examples) {
  EXPECT_EQ(pid_turn(0.0), Control{});
  EXPECT_EQ(pid_turn(0.6), (Control{0.0, 0.6}));
  EXPECT_EQ(pid_turn(-2.0), (Control{0.0, -1.4}));
}

TEST(PurePursuit, CurvatureTowardsThePath) {
  const SmoothPath straight({{0, 0}, {5, 0}});
  const LocalPolicy pp = pure_pursuit_policy(0.3, 0.2);
  PolicyInput in;
  in.path = &straight;
  in.pose = Pose2D(1, 0, 0);
  EXPECT_EQ(pp(in), (Control{0.2, 0.0}));
  in.pose = Pose2D(1, -0.1, 0);  // right of the path: turn left
  EXPECT_GT(pp(in).omega, 0.0);
  const Point2 g = local_goal(straight, in.pose, 0.3);
  EXPECT_NEAR(pp(in).omega, 0.2 * 2 * g.y / (g.x * g.x + g.y * g.y), 1e-12);
  EXPECT_THROW(pure_pursuit_policy(0.0), std::invalid_argument);
}

TEST(LfhPipeline, RejectsMismatchedModel) {
  const OccupancyGrid g = corridor_world();
  const std::vector<int> dims{10, 4, 2};
  EXPECT_THROW(LfhPipeline(g, init_params(1, dims)), std::invalid_argument);
  EXPECT_NO_THROW(LfhPipeline(g, init_params(1, kSpec)));
}

TEST(FsmStep, StraightCorridorIsLfhAtFullSpeedUp) {
  const OccupancyGrid g = corridor_world();
  const LfhPipeline pipe(g, constant_policy({0.2, 0.0}));
  const TickResult r = fsm_step(pipe, Pose2D(1.0, 1.0, 0.0), Pose2D(5.0, 1.0, 0.0), {}, {}, 3);
  EXPECT_EQ(r.state.mode, Mode::LfH);
  EXPECT_EQ(r.diag.p_safety, 1.0);
  EXPECT_NEAR(r.diag.modulation, std::exp(0.4), 1e-15);
  EXPECT_NEAR(r.control.v, 0.2 * std::exp(0.4), 1e-12);
  EXPECT_TRUE(r.diag.hallucinated);
  // Hallucinated walls are nearer than the real ones.
  EXPECT_NEAR(r.diag.input_scan[angle_to_beam(kPi / 2, kSpec)], 0.18, 0.02);
}

TEST(FsmStep, GoalBehindTurnsInPlaceTheShortWay) {
  const std::vector<Rect> none;
  const OccupancyGrid g = grid_from_rects(none, 0.05, 6.0, 4.0);
  const LfhPipeline pipe(g, constant_policy({0.2, 0.0}));
  for (double side : {-1.0, 1.0}) {
    const TickResult r = fsm_step(pipe, Pose2D(3.0, 2.0, 0.0), Pose2D(0.5, 2.0 + 0.6 * side, 0.0), {}, {}, 1);
    EXPECT_EQ(r.state.mode, Mode::TurnInPlace) << side;
    EXPECT_EQ(r.control.v, 0.0);
    EXPECT_GT(r.control.omega * side, 0.0) << side;
  }
}

TEST(FsmStep, DeadEndAheadRecovers) {
  // Wall 0.1 m in front of the bumper with a 0.1 m slot straight ahead: only the last rung
  // of the inflation ladder finds the slot, so the path points ahead and the body cannot pass.
  const std::vector<Rect> r{{1.31, 0.0, 1.5, 0.95}, {1.31, 1.05, 1.5, 3.0}};
  const OccupancyGrid g = grid_from_rects(r, 0.05, 3.0, 3.0);
  const LfhPipeline pipe(g, constant_policy({0.3, 0.0}));
  const TickResult t = fsm_step(pipe, Pose2D(1.0, 1.0, 0.0), Pose2D(2.5, 1.0, 0.0), {}, {}, 1);
  EXPECT_EQ(t.state.mode, Mode::Recovery);
  EXPECT_GE(t.state.recovery_stage, 1);
}

TEST(FsmStep, DeterministicAndAlwaysChecked) {
  const OccupancyGrid g = corridor_world();
  const LfhPipeline pipe(g, pure_pursuit_policy(0.3, 0.3));
  const SafetyConfig& sc = pipe.config().safety;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(0.6, 5.0), y(0.75, 1.25), a(-0.8, 0.8);
  for (int i = 0; i < 20; ++i) {
    const Pose2D pose(x(rng), y(rng), a(rng));
    const TickResult r1 = fsm_step(pipe, pose, Pose2D(5.5, 1.0, 0.0), {0.1, 0.0}, {}, 7);
    const TickResult r2 = fsm_step(pipe, pose, Pose2D(5.5, 1.0, 0.0), {0.1, 0.0}, {}, 7);
    EXPECT_EQ(r1.control, r2.control);
    EXPECT_EQ(r1.state, r2.state);
    EXPECT_EQ(r1.diag, r2.diag);
    if (r1.state.recovery_stage != 3) {
      EXPECT_FALSE(collision_check(Plan::constant(r1.control, sc.horizon, sc.mpc_dt), r1.diag.real_scan, kFp, sc));
    }
  }
}

TEST(DeriveSeed, StreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(1, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
}
