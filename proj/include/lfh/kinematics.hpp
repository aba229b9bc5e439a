#pragma once

#include <vector>

#include "lfh/geometry.hpp"

namespace lfh {

/// Linear and angular velocity command.
struct Control {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
  friend bool operator==(const Control&, const Control&) = default;
};

/// Velocity bounds. The defaults are the forward-driving bounds of the learned planner.
struct Limits {
  double v_min = 0.0;
  double v_max = 0.4;
  double omega_max = 1.4;

  void validate() const;
  Control clamp(Control u) const;
  bool admits(Control u) const;
  /// Bounds that also admit reversing, used by the recovery behavior.
  static Limits with_reverse() { return {-0.4, 0.4, 1.4}; }
  friend bool operator==(const Limits&, const Limits&) = default;
};

/// Control period of the simulator and the rollout step of every MPC check.
inline constexpr double kControlDt = 0.0625;
/// Below this |omega| a step integrates as a straight line.
inline constexpr double kStraightOmega = 1e-6;

/// A sequence of controls, each held for `dt` seconds.
struct Plan {
  std::vector<Control> controls;
  double dt = kControlDt;

  void validate() const;
  static Plan constant(Control u, int steps, double dt = kControlDt) {
    return Plan{std::vector<Control>(static_cast<std::size_t>(steps), u), dt};
  }
};

/// Exact constant-twist motion of a unicycle over `dt`.
Pose2D step(const Pose2D& pose, Control u, double dt);

/// Poses visited by `plan` from `pose`, including the start: size = plan length + 1.
std::vector<Pose2D> rollout(const Pose2D& pose, const Plan& plan);

}  // namespace lfh
