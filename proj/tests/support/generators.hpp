#pragma once

#include "coinspect/random.hpp"
#include "coinspect/world.hpp"

#include <vector>

namespace coinspect::testing {

inline Vec3 random_vec(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    const Vec3 v = random_vec(rng, -1.0, 1.0);
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

inline CellState random_state(Rng& rng) { return static_cast<CellState>(rng.below(3)); }

inline OccupancyMap random_map(Rng& rng, const VoxelGrid& grid, double p_occupied, double p_free = 0.0) {
  OccupancyMap m(grid);
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const double u = rng.uniform();
    if (u < p_occupied) {
      m.mark_occupied(i);
    } else if (u < p_occupied + p_free) {
      m.mark_free(i);
    }
  }
  return m;
}

inline VoxelIndex random_voxel(Rng& rng, const VoxelGrid& grid) {
  const auto& d = grid.dims();
  return {static_cast<int>(rng.below(static_cast<std::uint64_t>(d[0]))),
          static_cast<int>(rng.below(static_cast<std::uint64_t>(d[1]))),
          static_cast<int>(rng.below(static_cast<std::uint64_t>(d[2])))};
}

// Unit cube grid with V = 1 at the origin.
inline VoxelGrid cube_grid(int n, double V = 1.0) { return VoxelGrid(Vec3::Zero(), {n, n, n}, V); }

}  // namespace coinspect::testing
