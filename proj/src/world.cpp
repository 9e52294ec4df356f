#include "coinspect/world.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace coinspect {

namespace {

// Hit points sit exactly on surfaces; push them this far along the ray so a surface lying
// on a voxel face resolves to the voxel behind it.
constexpr double kHitNudge = 1e-6;

// Dimension counts within this tolerance of an integer are not rounded up.
constexpr double kCeilSlack = 1e-9;

constexpr char kMapMagic[] = "COINSPECT-OCCUPANCY";

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

std::ostream& operator<<(std::ostream& os, const VoxelIndex& v) {
  return os << '(' << v.x << ',' << v.y << ',' << v.z << ')';
}

OperationalVolume compute_operational_volume(std::span<const BoundingBox> boxes,
                                             std::span<const Vec3> initial_positions, double padding) {
  if (boxes.empty()) throw ConfigError("operational volume needs at least one inspection box");
  if (initial_positions.empty()) throw ConfigError("operational volume needs at least one agent position");

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& b : boxes) {
    lo = lo.cwiseMin(b.min_corner).cwiseMin(b.max_corner);
    hi = hi.cwiseMax(b.min_corner).cwiseMax(b.max_corner);
  }
  for (const auto& p : initial_positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 pad = Vec3::Constant(padding);
  return {lo - pad, hi + pad};
}

VoxelGrid::VoxelGrid(const Vec3& origin, const std::array<int, 3>& dims, double voxel_size)
    : origin_(origin), dims_(dims), voxel_size_(voxel_size) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  for (int d : dims) {
    if (d <= 0) throw ConfigError("grid dimensions must be positive");
  }
}

Vec3 VoxelGrid::upper() const {
  return origin_ + voxel_size_ * Vec3(dims_[0], dims_[1], dims_[2]);
}

bool VoxelGrid::contains(const Vec3& p) const {
  const Vec3 hi = upper();
  return (p.array() >= origin_.array()).all() && (p.array() <= hi.array()).all();
}

VoxelIndex VoxelGrid::from_linear(std::size_t i) const {
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny), static_cast<int>(i / (nx * ny))};
}

VoxelIndex VoxelGrid::world_to_voxel(const Vec3& p) const {
  if (!contains(p)) {
    throw RangeError(fmt::format("point ({}, {}, {}) lies outside the voxel grid", p.x(), p.y(), p.z()));
  }
  std::array<int, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const int i = static_cast<int>(std::floor((p[a] - origin_[a]) / voxel_size_));
    idx[a] = std::clamp(i, 0, dims_[a] - 1);
  }
  return {idx[0], idx[1], idx[2]};
}

Vec3 VoxelGrid::voxel_to_world(const VoxelIndex& v) const {
  return origin_ + voxel_size_ * Vec3(v.x + 0.5, v.y + 0.5, v.z + 0.5);
}

BoundingBox VoxelGrid::voxel_box(const VoxelIndex& v) const {
  const Vec3 lo = origin_ + voxel_size_ * Vec3(v.x, v.y, v.z);
  return {lo, lo + Vec3::Constant(voxel_size_)};
}

VoxelGrid build_grid(const OperationalVolume& volume, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double span = volume.hi[a] - volume.lo[a];
    if (span < 0.0) throw ConfigError("operational volume has lo > hi");
    dims[a] = std::max(1, static_cast<int>(std::ceil(span / voxel_size - kCeilSlack)));
  }
  return VoxelGrid(volume.lo, dims, voxel_size);
}

OccupancyMap::OccupancyMap(const VoxelGrid& grid) : grid_(grid), cells_(grid.cell_count(), CellState::Unknown) {}

void OccupancyMap::mark_free(const VoxelIndex& v) { mark_free(grid_.linear(v)); }
void OccupancyMap::mark_occupied(const VoxelIndex& v) { mark_occupied(grid_.linear(v)); }

std::size_t OccupancyMap::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

bool NavGraph::has_edge(const VoxelIndex& a, int face) const {
  if (!grid_.in_bounds(a)) return false;
  return (face_mask_[grid_.linear(a)] >> face) & 1U;
}

int NavGraph::degree(const VoxelIndex& v) const {
  int d = 0;
  for (int f = 0; f < 6; ++f) d += has_edge(v, f) ? 1 : 0;
  return d;
}

NavGraph build_graph(const VoxelGrid& grid, const OccupancyMap& map) {
  if (!(map.grid() == grid)) throw ConfigError("occupancy map is defined on a different grid");
  NavGraph g;
  g.grid_ = grid;
  g.face_mask_.assign(grid.cell_count(), 0);
  const auto& d = grid.dims();
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        const VoxelIndex v{x, y, z};
        if (map.at(v) == CellState::Occupied) continue;
        // Only the positive direction of each axis; the reverse bit is set on the neighbor.
        for (int f = 1; f < 6; f += 2) {
          const VoxelIndex n = v + kFaceSteps[f];
          if (!grid.in_bounds(n) || map.at(n) == CellState::Occupied) continue;
          g.face_mask_[grid.linear(v)] |= static_cast<std::uint8_t>(1U << f);
          g.face_mask_[grid.linear(n)] |= static_cast<std::uint8_t>(1U << (f - 1));
          ++g.edge_count_;
        }
      }
    }
  }
  return g;
}

std::vector<VoxelIndex> traverse_segment(const VoxelGrid& grid, const Vec3& a, const Vec3& b) {
  std::vector<VoxelIndex> out;
  const Vec3 d = b - a;

  // Clip the parametric segment a + t d, t in [0, 1], against the grid box.
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec3 lo = grid.origin();
  const Vec3 hi = grid.upper();
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] == 0.0) {
      if (a[ax] < lo[ax] || a[ax] > hi[ax]) return out;
      continue;
    }
    double ta = (lo[ax] - a[ax]) / d[ax];
    double tb = (hi[ax] - a[ax]) / d[ax];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return out;
  }

  const double V = grid.voxel_size();
  const auto& dims = grid.dims();
  const double len = d.norm();
  // Tiny step along the segment so a start exactly on a voxel face picks the voxel being entered.
  const double bias = len > 0.0 ? std::min(1e-9 / len, 0.5 * (t1 - t0)) : 0.0;
  const Vec3 start = a + (t0 + bias) * d;

  std::array<int, 3> cell{};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  for (int ax = 0; ax < 3; ++ax) {
    cell[ax] = std::clamp(static_cast<int>(std::floor((start[ax] - lo[ax]) / V)), 0, dims[ax] - 1);
    if (d[ax] > 0.0) {
      step[ax] = 1;
      t_max[ax] = (lo[ax] + (cell[ax] + 1) * V - a[ax]) / d[ax];
      t_delta[ax] = V / d[ax];
    } else if (d[ax] < 0.0) {
      step[ax] = -1;
      t_max[ax] = (lo[ax] + cell[ax] * V - a[ax]) / d[ax];
      t_delta[ax] = -V / d[ax];
    } else {
      step[ax] = 0;
      t_max[ax] = std::numeric_limits<double>::infinity();
      t_delta[ax] = std::numeric_limits<double>::infinity();
    }
  }

  const std::size_t guard = static_cast<std::size_t>(dims[0] + dims[1] + dims[2]) + 3;
  while (out.size() <= guard) {
    out.push_back({cell[0], cell[1], cell[2]});
    int ax = 0;
    if (t_max[1] < t_max[ax]) ax = 1;
    if (t_max[2] < t_max[ax]) ax = 2;
    if (t_max[ax] >= t1) break;
    cell[ax] += step[ax];
    if (cell[ax] < 0 || cell[ax] >= dims[ax]) break;
    t_max[ax] += t_delta[ax];
  }
  return out;
}

void integrate_points(OccupancyMap& map, const Vec3& sensor_origin, std::span<const Vec3> hits) {
  const VoxelGrid& grid = map.grid();
  for (const Vec3& hit : hits) {
    const Vec3 ray = hit - sensor_origin;
    const double len = ray.norm();
    const Vec3 end = len > 0.0 ? Vec3(hit + ray * (kHitNudge / len)) : hit;
    if (!grid.contains(end)) continue;
    const VoxelIndex hit_voxel = grid.world_to_voxel(end);
    for (const VoxelIndex& v : traverse_segment(grid, sensor_origin, end)) {
      if (v != hit_voxel) map.mark_free(v);
    }
    map.mark_occupied(hit_voxel);
  }
}

void clear_beams(OccupancyMap& map, const Vec3& sensor_origin, std::span<const Vec3> ends) {
  const VoxelGrid& grid = map.grid();
  for (const Vec3& end : ends) {
    const auto cells = traverse_segment(grid, sensor_origin, end);
    const bool end_inside = grid.contains(end);
    const std::size_t keep = end_inside && !cells.empty() ? cells.size() - 1 : cells.size();
    for (std::size_t i = 0; i < keep; ++i) map.mark_free(cells[i]);
  }
}

OccupancyMap merge_maps(const OccupancyMap& a, const OccupancyMap& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("cannot merge occupancy maps defined on different grids");
  OccupancyMap out = a;
  const auto cb = b.cells();
  for (std::size_t i = 0; i < cb.size(); ++i) {
    if (cb[i] == CellState::Occupied) {
      out.mark_occupied(i);
    } else if (cb[i] == CellState::Free) {
      out.mark_free(i);
    }
  }
  return out;
}

void write_map(std::ostream& os, const OccupancyMap& map) {
  const auto& g = map.grid();
  os << kMapMagic << " 1\n";
  os << fmt::format("origin {:.17g} {:.17g} {:.17g}\n", g.origin().x(), g.origin().y(), g.origin().z());
  os << fmt::format("dims {} {} {}\n", g.dims()[0], g.dims()[1], g.dims()[2]);
  os << fmt::format("voxel_size {:.17g}\n", g.voxel_size());
  os << fmt::format("payload {}\n", g.cell_count());
  const auto cells = map.cells();
  os.write(reinterpret_cast<const char*>(cells.data()), static_cast<std::streamsize>(cells.size()));
}

OccupancyMap read_map(std::istream& is) {
  auto expect_line = [&](const char* key) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(fmt::format("map dump truncated before '{}'", key));
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw ConfigError(fmt::format("map dump: expected '{}', found '{}'", key, k));
    return ls.str().substr(k.size());
  };
  {
    std::istringstream ls(expect_line(kMapMagic));
    int version = 0;
    ls >> version;
    if (version != 1) throw ConfigError("map dump: unsupported version");
  }
  Vec3 origin;
  std::array<int, 3> dims{};
  double V = 0.0;
  std::size_t payload = 0;
  {
    std::istringstream ls(expect_line("origin"));
    ls >> origin.x() >> origin.y() >> origin.z();
  }
  {
    std::istringstream ls(expect_line("dims"));
    ls >> dims[0] >> dims[1] >> dims[2];
  }
  {
    std::istringstream ls(expect_line("voxel_size"));
    ls >> V;
  }
  {
    std::istringstream ls(expect_line("payload"));
    ls >> payload;
  }
  OccupancyMap map(VoxelGrid(origin, dims, V));
  if (payload != map.grid().cell_count()) throw ConfigError("map dump: payload size does not match dims");
  std::vector<char> raw(payload);
  is.read(raw.data(), static_cast<std::streamsize>(payload));
  if (static_cast<std::size_t>(is.gcount()) != payload) throw ConfigError("map dump: payload truncated");
  for (std::size_t i = 0; i < payload; ++i) {
    switch (static_cast<unsigned char>(raw[i])) {
      case 0:
        break;
      case 1:
        map.mark_free(i);
        break;
      case 2:
        map.mark_occupied(i);
        break;
      default:
        throw ConfigError(fmt::format("map dump: invalid cell state at {}", i));
    }
  }
  return map;
}

void save_map(const std::string& path, const OccupancyMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_map(os, map);
}

OccupancyMap load_map(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_map(is);
}

}  // namespace coinspect
