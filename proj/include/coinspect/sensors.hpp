#pragma once

#include "coinspect/agents.hpp"
#include "coinspect/geometry.hpp"
#include "coinspect/scene.hpp"

#include <vector>

namespace coinspect {

// Focal length and pixel width are in pixels; desired resolution in meters per pixel.
struct CameraConfig {
  double fov_h = deg2rad(80.0);
  double fov_v = deg2rad(60.0);
  double range = 40.0;
  double focal = 1000.0;
  double pixel_width = 1.0;
  double exposure = 0.05;
  double desired_resolution = 0.03;
  double quality_floor = 0.1;

  void validate() const;
};

struct LidarConfig {
  double range = 50.0;
  int beams = 16;
  int azimuth_steps = 360;
  double vertical_aperture = deg2rad(30.0);
  double servo_period = 8.0;
  double servo_min = deg2rad(-90.0);
  double servo_max = deg2rad(90.0);
  bool clear_on_miss = true;  // beams without a return clear space out to `range`

  void validate() const;
};

struct Observation {
  int point_id = 0;
  int agent_id = 0;
  long timestep = 0;
  double q_blur = 0.0;
  double q_res = 0.0;
  double q = 0.0;
};

/// Camera pose in the world. Rows of `world_to_camera` are the camera x (right), y (down)
/// and z (optical axis) directions.
struct CameraFrame {
  Vec3 apex = Vec3::Zero();
  Mat3 world_to_camera = Mat3::Identity();

  Vec3 optical_axis() const { return world_to_camera.row(2).transpose(); }
  Vec3 to_camera(const Vec3& p) const { return world_to_camera * (p - apex); }
};

/// Frame looking along `axis` with a horizontal right vector. `heading` picks the right
/// vector when the axis is vertical.
CameraFrame make_camera_frame(const Vec3& apex, const Vec3& axis, double heading = 0.0);
CameraFrame camera_frame(const AgentState& agent, const GimbalState& gimbal);

/// Closed rectangular-pyramid test, truncated at the camera range.
bool fov_contains(const CameraFrame& frame, const CameraConfig& cfg, const Vec3& p);
bool fov_contains(const Vec3& apex, const Vec3& optical_axis, const CameraConfig& cfg, const Vec3& p);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole projection of a camera-frame point. Throws ProjectionError for z <= 0.
Pixel project(const Vec3& p_cam, double focal);

/// Motion-blur score of a camera-frame point moving at `v_cam` over the exposure.
double blur_score(const Vec3& p_cam, const Vec3& v_cam, const CameraConfig& cfg);

/// Resolution score from the ground sample distance at the point's depth.
double resolution_score(const Vec3& p_cam, const CameraConfig& cfg);

/// Observations (q > 0) of every visible interest point. The quality floor is not applied here.
std::vector<Observation> observe(const AgentState& agent, const GimbalState& gimbal, const Scene& scene,
                                 const CameraConfig& cfg, long timestep);

/// Triangle wave between servo_min and servo_max; starts at servo_min.
double servo_angle(double t, const LidarConfig& cfg);

/// Beam directions in the world frame for the given yaw and servo angle.
std::vector<Vec3> lidar_directions(double yaw, double servo, const LidarConfig& cfg);

/// Noise-free point cloud of everything within range.
std::vector<Vec3> lidar_scan(const AgentState& agent, const Scene& scene, const LidarConfig& cfg, double t);

struct LidarSweep {
  std::vector<Vec3> hits;
  std::vector<Vec3> misses;  // beam end points at full range for beams with no return
};

LidarSweep lidar_sweep(const AgentState& agent, const Scene& scene, const LidarConfig& cfg, double t);

}  // namespace coinspect
