#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <stdexcept>
#include <string>

namespace coinspect {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Error categories. Every failure the library reports derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct PlanningError : Error {
  using Error::Error;
};
struct ProjectionError : Error {
  using Error::Error;
};

/// Axis-aligned box, meters. Used both for the inspection set B and for solid obstacles.
struct BoundingBox {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();

  BoundingBox() = default;
  BoundingBox(const Vec3& lo, const Vec3& hi) : min_corner(lo), max_corner(hi) {}

  bool valid() const { return (min_corner.array() < max_corner.array()).all(); }
  Vec3 extent() const { return max_corner - min_corner; }
  Vec3 center() const { return 0.5 * (min_corner + max_corner); }

  // Closed containment.
  bool contains(const Vec3& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
  }
  bool strictly_contains(const Vec3& p) const {
    return (p.array() > min_corner.array()).all() && (p.array() < max_corner.array()).all();
  }

  std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
      out[i] = Vec3((i & 1) ? max_corner.x() : min_corner.x(), (i & 2) ? max_corner.y() : min_corner.y(),
                    (i & 4) ? max_corner.z() : min_corner.z());
    }
    return out;
  }
};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace coinspect
