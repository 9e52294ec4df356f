#include "coinspect/agents.hpp"

#include <algorithm>
#include <cmath>

namespace coinspect {

const char* to_string(AgentKind k) { return k == AgentKind::Explorer ? "explorer" : "photographer"; }

MotionLimits default_limits(AgentKind kind) {
  MotionLimits l;
  l.v_max = kind == AgentKind::Explorer ? 4.0 : 5.0;
  return l;
}

AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt) {
  AgentState out = x;
  out.position = x.position + x.velocity * dt;
  out.yaw = x.yaw + x.yaw_rate * dt;
  out.velocity = x.velocity + u.linear * dt;
  out.yaw_rate = x.yaw_rate + u.yaw * dt;
  return out;
}

AgentState step_dynamics(const AgentState& x, const ControlInput& u, double dt, const MotionLimits& limits) {
  AgentState out = step_dynamics(x, u, dt);
  const double speed = out.velocity.norm();
  if (speed > limits.v_max) out.velocity *= limits.v_max / speed;
  out.yaw_rate = std::clamp(out.yaw_rate, -limits.yaw_rate_max, limits.yaw_rate_max);
  out.yaw = wrap_angle(out.yaw);
  return out;
}

ControlInput track_segment(const AgentState& x, const Vec3& target, const MotionLimits& limits,
                           std::optional<double> desired_yaw) {
  ControlInput u;
  u.linear = limits.kp * (target - x.position) - limits.kd * x.velocity;
  const double n = u.linear.norm();
  if (n > limits.a_max) u.linear *= limits.a_max / n;
  if (desired_yaw) {
    const double err = wrap_angle(*desired_yaw - x.yaw);
    u.yaw = std::clamp(limits.yaw_kp * err - limits.yaw_kd * x.yaw_rate, -limits.yaw_accel_max,
                       limits.yaw_accel_max);
  }
  return u;
}

GimbalState clamp_gimbal(const GimbalState& g, const GimbalLimits& limits) {
  return {std::clamp(g.inclination, limits.inclination_min, limits.inclination_max),
          std::clamp(g.azimuth, limits.azimuth_min, limits.azimuth_max)};
}

GimbalState point_gimbal(const GimbalState& g, const AgentState& agent, const Vec3& n_hat, const GimbalLimits& limits) {
  const double horiz = std::hypot(n_hat.x(), n_hat.y());
  GimbalState out;
  out.inclination = std::atan2(n_hat.z(), horiz);
  // Straight up or down: azimuth is free, keep the previous one.
  out.azimuth = horiz > 1e-12 ? wrap_angle(std::atan2(n_hat.y(), n_hat.x()) - agent.yaw) : g.azimuth;
  return clamp_gimbal(out, limits);
}

}  // namespace coinspect
