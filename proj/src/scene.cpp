#include "coinspect/scene.hpp"

#include "coinspect/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coinspect {

namespace {

constexpr double kParallelEps = 1e-14;
constexpr double kBarycentricSlack = 1e-12;
// Voxel boxes are shrunk by this much so geometry lying exactly on a voxel face does not count.
constexpr double kOpenShrink = 1e-9;

bool separated_on_axis(const Vec3& axis, const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& half) {
  const double p0 = axis.dot(v0);
  const double p1 = axis.dot(v1);
  const double p2 = axis.dot(v2);
  const double r = half.x() * std::abs(axis.x()) + half.y() * std::abs(axis.y()) + half.z() * std::abs(axis.z());
  return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
}

}  // namespace

std::vector<Triangle> box_shell(const BoundingBox& box) {
  const auto c = box.corners();
  // Corner i has bit0 -> x max, bit1 -> y max, bit2 -> z max.
  auto quad = [&](int a, int b, int cc, int d, std::vector<Triangle>& out) {
    out.push_back({c[a], c[b], c[cc]});
    out.push_back({c[a], c[cc], c[d]});
  };
  std::vector<Triangle> out;
  out.reserve(12);
  quad(0, 4, 6, 2, out);  // -x
  quad(1, 3, 7, 5, out);  // +x
  quad(0, 1, 5, 4, out);  // -y
  quad(2, 6, 7, 3, out);  // +y
  quad(0, 2, 3, 1, out);  // -z
  quad(4, 5, 7, 6, out);  // +z
  return out;
}

bool intersect_triangle(const Triangle& tri, const Vec3& origin, const Vec3& dir, double& t) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kParallelEps) return false;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - tri.a;
  const double u = tvec.dot(pvec) * inv;
  if (u < -kBarycentricSlack || u > 1.0 + kBarycentricSlack) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < -kBarycentricSlack || u + v > 1.0 + kBarycentricSlack) return false;
  t = e2.dot(qvec) * inv;
  return true;
}

bool intersect_box(const BoundingBox& box, const Vec3& origin, const Vec3& dir, double& t_enter, double& t_exit) {
  t_enter = -std::numeric_limits<double>::infinity();
  t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.min_corner[a] || origin[a] > box.max_corner[a]) return false;
      continue;
    }
    double t0 = (box.min_corner[a] - origin[a]) / dir[a];
    double t1 = (box.max_corner[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

RayHit ray_cast(const Scene& scene, const Vec3& origin, const Vec3& dir_in, double max_range) {
  const double n = dir_in.norm();
  if (!(n > 0.0)) throw Error("ray_cast: zero direction vector");
  const Vec3 dir = dir_in / n;

  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : scene.triangles) {
    double t = 0.0;
    if (intersect_triangle(tri, origin, dir, t) && t >= 0.0 && t < best) best = t;
  }
  for (const auto& box : scene.solids) {
    double t0 = 0.0;
    double t1 = 0.0;
    if (!intersect_box(box, origin, dir, t0, t1) || t1 < 0.0) continue;
    const double t = std::max(t0, 0.0);
    if (t < best) best = t;
  }
  RayHit out;
  if (best <= max_range) {
    out.hit = true;
    out.distance = best;
    out.point = origin + best * dir;
  }
  return out;
}

bool line_of_sight(const Scene& scene, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double dist = d.norm();
  if (dist <= 2.0 * kLosEpsilon) return true;
  const Vec3 dir = d / dist;
  const double lo = kLosEpsilon;
  const double hi = dist - kLosEpsilon;
  for (const auto& tri : scene.triangles) {
    double t = 0.0;
    if (intersect_triangle(tri, a, dir, t) && t >= lo && t <= hi) return false;
  }
  for (const auto& box : scene.solids) {
    double t0 = 0.0;
    double t1 = 0.0;
    if (intersect_box(box, a, dir, t0, t1) && t1 >= lo && t0 <= hi) return false;
  }
  return true;
}

std::vector<InterestPoint> visible_interest_points(const Scene& scene, const Vec3& camera_apex,
                                                   const FovTest& fov_test) {
  std::vector<InterestPoint> out;
  for (const auto& ip : scene.interest_points) {
    if (!fov_test(ip.position)) continue;
    if (ip.normal.dot(camera_apex - ip.position) <= 0.0) continue;
    if (!line_of_sight(scene, camera_apex, ip.position + kSurfaceBackoff * ip.normal)) continue;
    out.push_back(ip);
  }
  return out;
}

bool triangle_overlaps_box(const Triangle& tri, const BoundingBox& box) {
  const Vec3 c = box.center();
  const Vec3 h = 0.5 * box.extent();
  const Vec3 v0 = tri.a - c;
  const Vec3 v1 = tri.b - c;
  const Vec3 v2 = tri.c - c;

  for (int a = 0; a < 3; ++a) {
    if (std::min({v0[a], v1[a], v2[a]}) > h[a] || std::max({v0[a], v1[a], v2[a]}) < -h[a]) return false;
  }
  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;
  const Vec3 normal = e0.cross(e1);
  if (normal.squaredNorm() > 0.0 && separated_on_axis(normal, v0, v1, v2, h)) return false;
  for (const Vec3& e : {e0, e1, e2}) {
    for (int a = 0; a < 3; ++a) {
      const Vec3 axis = Vec3::Unit(a).cross(e);
      if (axis.squaredNorm() < 1e-24) continue;
      if (separated_on_axis(axis, v0, v1, v2, h)) return false;
    }
  }
  return true;
}

bool voxel_is_obstructed(const Scene& scene, const BoundingBox& voxel) {
  for (const auto& s : scene.solids) {
    if ((s.min_corner.array() < voxel.max_corner.array()).all() &&
        (s.max_corner.array() > voxel.min_corner.array()).all()) {
      return true;
    }
  }
  const BoundingBox open(voxel.min_corner + Vec3::Constant(kOpenShrink), voxel.max_corner - Vec3::Constant(kOpenShrink));
  for (const auto& tri : scene.triangles) {
    if (triangle_overlaps_box(tri, open)) return true;
  }
  return false;
}

std::vector<std::uint8_t> ground_truth_occupancy(const Scene& scene, const VoxelGrid& grid) {
  std::vector<std::uint8_t> out(grid.cell_count(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = voxel_is_obstructed(scene, grid.voxel_box(grid.from_linear(i))) ? 1 : 0;
  }
  return out;
}

namespace {

struct Face {
  int axis;
  bool positive;
  double area;
};

std::array<Face, 6> box_faces(const BoundingBox& box) {
  const Vec3 e = box.extent();
  std::array<Face, 6> faces{};
  for (int a = 0; a < 3; ++a) {
    const double area = e[(a + 1) % 3] * e[(a + 2) % 3];
    faces[2 * a] = {a, false, area};
    faces[2 * a + 1] = {a, true, area};
  }
  return faces;
}

InterestPoint sample_face(const BoundingBox& box, const Face& f, Rng& rng, int id) {
  InterestPoint ip;
  ip.id = id;
  const int u = (f.axis + 1) % 3;
  const int v = (f.axis + 2) % 3;
  ip.position[f.axis] = f.positive ? box.max_corner[f.axis] : box.min_corner[f.axis];
  ip.position[u] = box.min_corner[u] + rng.uniform() * (box.max_corner[u] - box.min_corner[u]);
  ip.position[v] = box.min_corner[v] + rng.uniform() * (box.max_corner[v] - box.min_corner[v]);
  ip.normal = Vec3::Zero();
  ip.normal[f.axis] = f.positive ? 1.0 : -1.0;
  return ip;
}

}  // namespace

std::vector<InterestPoint> scatter_on_box(const BoundingBox& box, int count, std::uint64_t seed, int first_id) {
  if (!box.valid()) throw ConfigError("scatter box must have min < max");
  if (count < 0) throw ConfigError("scatter count must be non-negative");
  const auto faces = box_faces(box);
  double total = 0.0;
  for (const auto& f : faces) total += f.area;

  Rng rng(seed);
  std::vector<InterestPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    double pick = rng.uniform() * total;
    std::size_t fi = 0;
    while (fi + 1 < faces.size() && pick >= faces[fi].area) {
      pick -= faces[fi].area;
      ++fi;
    }
    out.push_back(sample_face(box, faces[fi], rng, first_id + i));
  }
  return out;
}

std::vector<InterestPoint> scatter_per_face(const BoundingBox& box, int per_face, std::uint64_t seed, int first_id) {
  if (!box.valid()) throw ConfigError("scatter box must have min < max");
  if (per_face < 0) throw ConfigError("scatter count must be non-negative");
  Rng rng(seed);
  std::vector<InterestPoint> out;
  int id = first_id;
  for (const auto& f : box_faces(box)) {
    for (int i = 0; i < per_face; ++i) out.push_back(sample_face(box, f, rng, id++));
  }
  return out;
}

}  // namespace coinspect
