#include "coinspect/sensors.hpp"

#include <algorithm>
#include <cmath>

namespace coinspect {

namespace {

// Half-angle comparisons tolerate this much rounding so boundary points stay inside.
constexpr double kAngleSlack = 1e-12;

// World-space shift used to measure the ground sample distance; with a 1 m shift the
// pixel-width ratio reads directly in meters per pixel.
constexpr double kResolutionShift = 1.0;

bool within_half_angles(const Vec3& p_cam, const CameraConfig& cfg) {
  return std::abs(std::atan2(p_cam.x(), p_cam.z())) <= 0.5 * cfg.fov_h + kAngleSlack &&
         std::abs(std::atan2(p_cam.y(), p_cam.z())) <= 0.5 * cfg.fov_v + kAngleSlack;
}

bool in_frustum_camera(const Vec3& p_cam, const CameraConfig& cfg) {
  return p_cam.z() > 0.0 && p_cam.norm() <= cfg.range && within_half_angles(p_cam, cfg);
}

}  // namespace

void CameraConfig::validate() const {
  if (!(fov_h > 0.0 && fov_v > 0.0 && fov_h < kPi && fov_v < kPi)) throw ConfigError("camera FoV must be in (0, 180) deg");
  if (!(range > 0.0)) throw ConfigError("camera range must be positive");
  if (!(focal > 0.0)) throw ConfigError("camera focal length must be positive");
  if (!(pixel_width > 0.0)) throw ConfigError("camera pixel width must be positive");
  if (!(exposure > 0.0)) throw ConfigError("camera exposure must be positive");
  if (!(desired_resolution > 0.0)) throw ConfigError("desired resolution must be positive");
  if (!(quality_floor >= 0.0 && quality_floor <= 1.0)) throw ConfigError("quality floor must lie in [0, 1]");
}

void LidarConfig::validate() const {
  if (!(range > 0.0)) throw ConfigError("lidar range must be positive");
  if (beams < 1) throw ConfigError("lidar needs at least one beam");
  if (azimuth_steps < 1) throw ConfigError("lidar needs at least one azimuth step");
  if (!(servo_period > 0.0)) throw ConfigError("lidar servo period must be positive");
  if (!(servo_min <= servo_max)) throw ConfigError("lidar servo limits are inverted");
  if (!(vertical_aperture >= 0.0)) throw ConfigError("lidar vertical aperture must be non-negative");
}

CameraFrame make_camera_frame(const Vec3& apex, const Vec3& axis_in, double heading) {
  const Vec3 z = axis_in.normalized();
  Vec3 x = z.cross(Vec3::UnitZ());
  if (x.norm() < 1e-9) {
    x = Vec3(std::sin(heading), -std::cos(heading), 0.0);
  } else {
    x.normalize();
  }
  const Vec3 y = z.cross(x);
  CameraFrame f;
  f.apex = apex;
  f.world_to_camera.row(0) = x.transpose();
  f.world_to_camera.row(1) = y.transpose();
  f.world_to_camera.row(2) = z.transpose();
  return f;
}

CameraFrame camera_frame(const AgentState& agent, const GimbalState& gimbal) {
  const double heading = agent.yaw + gimbal.azimuth;
  const double c = std::cos(gimbal.inclination);
  const Vec3 z(c * std::cos(heading), c * std::sin(heading), std::sin(gimbal.inclination));
  const Vec3 x(std::sin(heading), -std::cos(heading), 0.0);
  const Vec3 y = z.cross(x);
  CameraFrame f;
  f.apex = agent.position;
  f.world_to_camera.row(0) = x.transpose();
  f.world_to_camera.row(1) = y.transpose();
  f.world_to_camera.row(2) = z.transpose();
  return f;
}

bool fov_contains(const CameraFrame& frame, const CameraConfig& cfg, const Vec3& p) {
  return in_frustum_camera(frame.to_camera(p), cfg);
}

bool fov_contains(const Vec3& apex, const Vec3& optical_axis, const CameraConfig& cfg, const Vec3& p) {
  return fov_contains(make_camera_frame(apex, optical_axis), cfg, p);
}

Pixel project(const Vec3& p_cam, double focal) {
  if (!(p_cam.z() > 0.0)) throw ProjectionError("cannot project a point at or behind the image plane");
  return {focal * p_cam.x() / p_cam.z(), focal * p_cam.y() / p_cam.z()};
}

double blur_score(const Vec3& p_cam, const Vec3& v_cam, const CameraConfig& cfg) {
  const Vec3 p1 = p_cam + v_cam * cfg.exposure;
  if (!(p_cam.z() > 0.0) || !(p1.z() > 0.0)) return 0.0;
  if (!in_frustum_camera(p1, cfg)) return 0.0;
  const Pixel a = project(p_cam, cfg.focal);
  const Pixel b = project(p1, cfg.focal);
  const double moved = std::max(std::abs(b.u - a.u), std::abs(b.v - a.v));
  if (moved == 0.0) return 1.0;
  return std::min(cfg.pixel_width / moved, 1.0);
}

double resolution_score(const Vec3& p_cam, const CameraConfig& cfg) {
  const Pixel base = project(p_cam, cfg.focal);
  const Pixel sx = project(p_cam + Vec3(kResolutionShift, 0.0, 0.0), cfg.focal);
  const Pixel sy = project(p_cam + Vec3(0.0, kResolutionShift, 0.0), cfg.focal);
  const double r_horz = cfg.pixel_width / std::abs(sx.u - base.u);
  const double r_vert = cfg.pixel_width / std::abs(sy.v - base.v);
  return std::min(cfg.desired_resolution / std::max(r_horz, r_vert), 1.0);
}

std::vector<Observation> observe(const AgentState& agent, const GimbalState& gimbal, const Scene& scene,
                                 const CameraConfig& cfg, long timestep) {
  const CameraFrame frame = camera_frame(agent, gimbal);
  const auto visible =
      visible_interest_points(scene, frame.apex, [&](const Vec3& p) { return fov_contains(frame, cfg, p); });
  // Structures are static, so a point's camera-frame velocity is the agent's, reversed.
  const Vec3 v_cam = frame.world_to_camera * (-agent.velocity);
  std::vector<Observation> out;
  out.reserve(visible.size());
  for (const auto& ip : visible) {
    const Vec3 p_cam = frame.to_camera(ip.position);
    Observation o;
    o.point_id = ip.id;
    o.agent_id = agent.id;
    o.timestep = timestep;
    o.q_blur = blur_score(p_cam, v_cam, cfg);
    o.q_res = resolution_score(p_cam, cfg);
    o.q = o.q_blur * o.q_res;
    if (o.q > 0.0) out.push_back(o);
  }
  return out;
}

double servo_angle(double t, const LidarConfig& cfg) {
  const double phase = std::fmod(std::max(t, 0.0), cfg.servo_period) / cfg.servo_period;
  const double sweep = cfg.servo_max - cfg.servo_min;
  if (phase <= 0.5) return cfg.servo_min + sweep * 2.0 * phase;
  return cfg.servo_max - sweep * 2.0 * (phase - 0.5);
}

std::vector<Vec3> lidar_directions(double yaw, double servo, const LidarConfig& cfg) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(cfg.beams) * static_cast<std::size_t>(cfg.azimuth_steps));
  const double cs = std::cos(servo);
  const double ss = std::sin(servo);
  const double cy = std::cos(yaw);
  const double sy = std::sin(yaw);
  for (int j = 0; j < cfg.beams; ++j) {
    const double el = cfg.beams == 1 ? 0.0
                                     : -0.5 * cfg.vertical_aperture + cfg.vertical_aperture * j / (cfg.beams - 1);
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (int m = 0; m < cfg.azimuth_steps; ++m) {
      const double az = 2.0 * kPi * m / cfg.azimuth_steps;
      const Vec3 s(ce * std::cos(az), ce * std::sin(az), se);
      // Servo pitches the pattern about the body x-axis, then yaw rotates body into world.
      const Vec3 b(s.x(), s.y() * cs - s.z() * ss, s.y() * ss + s.z() * cs);
      dirs.emplace_back(b.x() * cy - b.y() * sy, b.x() * sy + b.y() * cy, b.z());
    }
  }
  return dirs;
}

std::vector<Vec3> lidar_scan(const AgentState& agent, const Scene& scene, const LidarConfig& cfg, double t) {
  std::vector<Vec3> cloud;
  if (scene.triangles.empty() && scene.solids.empty()) return cloud;
  for (const Vec3& d : lidar_directions(agent.yaw, servo_angle(t, cfg), cfg)) {
    const RayHit h = ray_cast(scene, agent.position, d, cfg.range);
    if (h.hit) cloud.push_back(h.point);
  }
  return cloud;
}

LidarSweep lidar_sweep(const AgentState& agent, const Scene& scene, const LidarConfig& cfg, double t) {
  LidarSweep out;
  for (const Vec3& d : lidar_directions(agent.yaw, servo_angle(t, cfg), cfg)) {
    const RayHit h = ray_cast(scene, agent.position, d, cfg.range);
    if (h.hit) {
      out.hits.push_back(h.point);
    } else {
      out.misses.push_back(agent.position + cfg.range * d);
    }
  }
  return out;
}

}  // namespace coinspect
