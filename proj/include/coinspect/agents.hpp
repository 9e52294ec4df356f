#pragma once

#include "coinspect/geometry.hpp"

#include <optional>

namespace coinspect {

enum class AgentKind { Explorer, Photographer };

const char* to_string(AgentKind k);

/// Kinematic state: position, yaw, linear velocity, yaw rate (inertial frame).
struct AgentState {
  int id = 0;
  AgentKind kind = AgentKind::Photographer;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  Vec3 velocity = Vec3::Zero();
  double yaw_rate = 0.0;
};

/// Linear acceleration (m/s^2) and yaw acceleration (rad/s^2), inertial frame.
struct ControlInput {
  Vec3 linear = Vec3::Zero();
  double yaw = 0.0;
};

struct MotionLimits {
  double v_max = 5.0;      // m/s
  double a_max = 4.0;      // m/s^2
  double yaw_rate_max = 1.5;  // rad/s
  double yaw_accel_max = 3.0;  // rad/s^2
  double kp = 1.0;
  double kd = 2.2;
  double yaw_kp = 4.0;
  double yaw_kd = 4.0;
};

MotionLimits default_limits(AgentKind kind);

/// Body-relative camera angles. Inclination is positive up, azimuth positive to the left.
struct GimbalState {
  double inclination = 0.0;
  double azimuth = 0.0;
};

struct GimbalLimits {
  double inclination_min = deg2rad(-90.0);
  double inclination_max = deg2rad(80.0);
  double azimuth_min = deg2rad(-90.0);
  double azimuth_max = deg2rad(90.0);
};

/// The linear double-integrator update, no saturation.
AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt);

/// The same update followed by speed and yaw-rate clamping.
AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt, const MotionLimits& limits);

/// PD acceleration toward `target`, saturated at a_max. With a desired yaw, also a PD yaw
/// acceleration saturated at yaw_accel_max.
ControlInput track_segment(const AgentState& x, const Vec3& target, const MotionLimits& limits,
                           std::optional<double> desired_yaw = std::nullopt);

/// Gimbal angles aligning the camera axis with `n_hat` for the agent's yaw, clamped to limits.
GimbalState point_gimbal(const GimbalState& g, const AgentState& agent, const Vec3& n_hat,
                         const GimbalLimits& limits = {});

GimbalState clamp_gimbal(const GimbalState& g, const GimbalLimits& limits);

}  // namespace coinspect
