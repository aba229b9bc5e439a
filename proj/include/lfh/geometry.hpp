#pragma once

#include <cmath>
#include <numbers>

namespace lfh {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;

  double norm() const { return std::hypot(x, y); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// SE(2) configuration. The heading is kept wrapped into (-pi, pi].
class Pose2D {
 public:
  double x = 0.0;
  double y = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double psi) : x(x_), y(y_), psi_(wrap_angle(psi)) {}

  double psi() const { return psi_; }
  void set_psi(double psi) { psi_ = wrap_angle(psi); }
  Point2 position() const { return {x, y}; }

  /// Maps a point given in this pose's frame into the parent frame.
  Point2 to_world(Point2 local) const {
    const double c = std::cos(psi_), s = std::sin(psi_);
    return {x + c * local.x - s * local.y, y + s * local.x + c * local.y};
  }

  /// Maps a parent-frame point into this pose's frame.
  Point2 to_local(Point2 world) const {
    const double c = std::cos(psi_), s = std::sin(psi_);
    const double dx = world.x - x, dy = world.y - y;
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  /// Expresses `other` in this pose's frame.
  Pose2D relative(const Pose2D& other) const {
    const Point2 p = to_local(other.position());
    return {p.x, p.y, other.psi_ - psi_};
  }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double psi_ = 0.0;
};

}  // namespace lfh
