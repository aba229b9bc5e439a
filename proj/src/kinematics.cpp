#include "lfh/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfh {

void Limits::validate() const {
  if (!(v_min <= 0.0 && 0.0 <= v_max) || !(omega_max > 0.0)) {
    throw std::invalid_argument("limits must satisfy v_min <= 0 <= v_max and omega_max > 0");
  }
}

Control Limits::clamp(Control u) const {
  return {std::clamp(u.v, v_min, v_max), std::clamp(u.omega, -omega_max, omega_max)};
}

bool Limits::admits(Control u) const {
  return u.v >= v_min && u.v <= v_max && std::abs(u.omega) <= omega_max;
}

void Plan::validate() const {
  if (controls.empty()) throw std::invalid_argument("plan must not be empty");
  if (!(dt > 0.0)) throw std::invalid_argument("plan dt must be positive");
}

Pose2D step(const Pose2D& pose, Control u, double dt) {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.psi()) ||
      !std::isfinite(u.v) || !std::isfinite(u.omega) || !std::isfinite(dt)) {
    throw std::invalid_argument("step: non-finite input");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const double psi = pose.psi();
  if (std::abs(u.omega) < kStraightOmega) {
    return {pose.x + u.v * dt * std::cos(psi), pose.y + u.v * dt * std::sin(psi), psi + u.omega * dt};
  }
  const double r = u.v / u.omega;
  const double psi_next = psi + u.omega * dt;
  return {pose.x + r * (std::sin(psi_next) - std::sin(psi)), pose.y - r * (std::cos(psi_next) - std::cos(psi)),
          psi_next};
}

std::vector<Pose2D> rollout(const Pose2D& pose, const Plan& plan) {
  plan.validate();
  std::vector<Pose2D> poses;
  poses.reserve(plan.controls.size() + 1);
  poses.push_back(pose);
  for (const Control& u : plan.controls) poses.push_back(step(poses.back(), u, plan.dt));
  return poses;
}

}  // namespace lfh
