#pragma once

#include "coinspect/geometry.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace coinspect {

/// Cuboid that bounds the whole mission: every inspection box and every start position.
struct OperationalVolume {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 extent() const { return hi - lo; }
};

/// Smallest cuboid containing all box corners and all positions, grown outward by
/// `padding` meters on every face. Throws ConfigError when either list is empty.
OperationalVolume compute_operational_volume(std::span<const BoundingBox> boxes,
                                             std::span<const Vec3> initial_positions, double padding);

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  friend auto operator<=>(const VoxelIndex&, const VoxelIndex&) = default;
  VoxelIndex operator+(const VoxelIndex& o) const { return {x + o.x, y + o.y, z + o.z}; }
};

std::ostream& operator<<(std::ostream& os, const VoxelIndex& v);

// Face directions in a fixed order: -x, +x, -y, +y, -z, +z.
inline constexpr std::array<VoxelIndex, 6> kFaceSteps{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, const std::array<int, 3>& dims, double voxel_size);

  const Vec3& origin() const { return origin_; }
  const std::array<int, 3>& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) *
           static_cast<std::size_t>(dims_[2]);
  }
  Vec3 upper() const;

  bool in_bounds(const VoxelIndex& v) const {
    return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < dims_[0] && v.y < dims_[1] && v.z < dims_[2];
  }
  bool contains(const Vec3& p) const;

  // x-fastest linear ordering.
  std::size_t linear(const VoxelIndex& v) const {
    return static_cast<std::size_t>(v.x) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(v.y) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(v.z));
  }
  VoxelIndex from_linear(std::size_t i) const;

  /// floor((p - origin) / V). Points on the upper grid boundary fall in the last voxel.
  /// Throws RangeError outside the grid.
  VoxelIndex world_to_voxel(const Vec3& p) const;
  Vec3 voxel_to_world(const VoxelIndex& v) const;
  BoundingBox voxel_box(const VoxelIndex& v) const;

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  std::array<int, 3> dims_{0, 0, 0};
  double voxel_size_ = 1.0;
};

/// dims = ceil((hi - lo) / V) per axis, at least one voxel. Throws ConfigError for V <= 0.
VoxelGrid build_grid(const OperationalVolume& volume, double voxel_size);

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Join under Occupied > Free > Unknown.
inline CellState join(CellState a, CellState b) { return a > b ? a : b; }

/// Tri-state voxel belief. Cells only move toward knowledge: Unknown -> Free -> Occupied.
class OccupancyMap {
 public:
  OccupancyMap() = default;
  explicit OccupancyMap(const VoxelGrid& grid);

  const VoxelGrid& grid() const { return grid_; }
  CellState at(const VoxelIndex& v) const { return cells_[grid_.linear(v)]; }
  CellState at(std::size_t linear) const { return cells_[linear]; }
  std::span<const CellState> cells() const { return cells_; }

  void mark_free(const VoxelIndex& v);
  void mark_occupied(const VoxelIndex& v);
  void mark_free(std::size_t linear) {
    if (cells_[linear] == CellState::Unknown) cells_[linear] = CellState::Free;
  }
  void mark_occupied(std::size_t linear) { cells_[linear] = CellState::Occupied; }

  std::size_t count(CellState s) const;
  bool empty_of_knowledge() const { return count(CellState::Unknown) == cells_.size(); }

  friend bool operator==(const OccupancyMap&, const OccupancyMap&) = default;

 private:
  VoxelGrid grid_;
  std::vector<CellState> cells_;
};

/// Undirected 6-connected lattice over the grid. Occupied voxels have degree zero.
class NavGraph {
 public:
  NavGraph() = default;

  const VoxelGrid& grid() const { return grid_; }
  double edge_weight() const { return grid_.voxel_size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool has_edge(const VoxelIndex& a, int face) const;
  int degree(const VoxelIndex& v) const;

  friend NavGraph build_graph(const VoxelGrid& grid, const OccupancyMap& map);

 private:
  VoxelGrid grid_;
  std::vector<std::uint8_t> face_mask_;  // bit f set when the edge through kFaceSteps[f] exists
  std::size_t edge_count_ = 0;
};

NavGraph build_graph(const VoxelGrid& grid, const OccupancyMap& map);

/// Voxels pierced by the segment a -> b in traversal order (3D DDA), clipped to the grid.
std::vector<VoxelIndex> traverse_segment(const VoxelGrid& grid, const Vec3& a, const Vec3& b);

/// Marks each hit's voxel Occupied and the voxels crossed on the way there Free.
/// Hits outside the grid are dropped.
void integrate_points(OccupancyMap& map, const Vec3& sensor_origin, std::span<const Vec3> hits);

/// Marks Free every voxel a return-less beam crosses, except the one holding its end point,
/// which the beam only partly saw. Occupied cells are untouched.
void clear_beams(OccupancyMap& map, const Vec3& sensor_origin, std::span<const Vec3> ends);

/// Per-cell join. Throws ConfigError when the grids differ.
OccupancyMap merge_maps(const OccupancyMap& a, const OccupancyMap& b);

// Dump: text header (magic, origin, dims, voxel size) followed by one raw state byte per cell.
void write_map(std::ostream& os, const OccupancyMap& map);
OccupancyMap read_map(std::istream& is);
void save_map(const std::string& path, const OccupancyMap& map);
OccupancyMap load_map(const std::string& path);

}  // namespace coinspect
