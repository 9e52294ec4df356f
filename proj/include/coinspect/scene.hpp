#pragma once

#include "coinspect/geometry.hpp"
#include "coinspect/world.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace coinspect {

struct Triangle {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 c = Vec3::Zero();
};

struct InterestPoint {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // outward, unit length
};

struct RayHit {
  bool hit = false;
  double distance = 0.0;
  Vec3 point = Vec3::Zero();
};

/// Ground truth for a mission. Immutable once built; safe to share between threads.
struct Scene {
  std::vector<Triangle> triangles;
  std::vector<BoundingBox> solids;
  std::vector<InterestPoint> interest_points;
  std::vector<BoundingBox> inspection_boxes;
};

// Distance used when testing whether a segment is obstructed; hits closer than this to
// either endpoint are ignored so line_of_sight is symmetric.
inline constexpr double kLosEpsilon = 1e-6;

// Interest points are pulled this far off their surface along the normal before occlusion tests.
inline constexpr double kSurfaceBackoff = 1e-3;

/// Twelve outward-wound triangles forming the closed surface of `box`.
std::vector<Triangle> box_shell(const BoundingBox& box);

/// Nearest intersection with any triangle or solid box within max_range. Rays starting inside
/// a solid hit at distance zero. Throws Error for a zero direction.
RayHit ray_cast(const Scene& scene, const Vec3& origin, const Vec3& dir, double max_range);

/// True when no geometry crosses the open segment between a and b.
bool line_of_sight(const Scene& scene, const Vec3& a, const Vec3& b);

using FovTest = std::function<bool(const Vec3&)>;

/// Interest points that pass `fov_test`, face the apex, and are not occluded.
std::vector<InterestPoint> visible_interest_points(const Scene& scene, const Vec3& camera_apex,
                                                   const FovTest& fov_test);

// Ground-truth occupancy of a voxel: some solid or triangle meets its open interior.
bool voxel_is_obstructed(const Scene& scene, const BoundingBox& voxel);
std::vector<std::uint8_t> ground_truth_occupancy(const Scene& scene, const VoxelGrid& grid);

// Exact intersection tests, exposed for brute-force checks.
bool intersect_triangle(const Triangle& tri, const Vec3& origin, const Vec3& dir, double& t);
bool intersect_box(const BoundingBox& box, const Vec3& origin, const Vec3& dir, double& t_enter, double& t_exit);
bool triangle_overlaps_box(const Triangle& tri, const BoundingBox& box);

/// Points scattered uniformly (area-weighted) over the six faces of `box`, with outward normals.
std::vector<InterestPoint> scatter_on_box(const BoundingBox& box, int count, std::uint64_t seed, int first_id);
/// `per_face` points on each of the six faces.
std::vector<InterestPoint> scatter_per_face(const BoundingBox& box, int per_face, std::uint64_t seed, int first_id);

}  // namespace coinspect
