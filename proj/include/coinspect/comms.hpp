#pragma once

#include "coinspect/scene.hpp"
#include "coinspect/world.hpp"

#include <span>
#include <utility>
#include <vector>

namespace coinspect {

/// Symmetric line-of-sight adjacency. `neighbors[i]` lists agent slots in ascending order.
struct NeighborSet {
  std::vector<std::vector<int>> neighbors;

  std::size_t size() const { return neighbors.size(); }
  bool linked(int i, int j) const;
  std::vector<std::pair<int, int>> edges() const;  // i < j, lexicographic
  // Drops every link touching a slot whose mask entry is false.
  NeighborSet restricted(std::span<const bool> active) const;
};

NeighborSet discover_neighbors(std::span<const Vec3> positions, const Scene& scene);

/// One synchronous gossip round: every map becomes the join of its pre-round value with the
/// pre-round maps of its neighbors.
std::vector<OccupancyMap> exchange_and_merge(const NeighborSet& neighbors, std::span<const OccupancyMap> maps);

}  // namespace coinspect
