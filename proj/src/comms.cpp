#include "coinspect/comms.hpp"

#include <algorithm>

namespace coinspect {

bool NeighborSet::linked(int i, int j) const {
  const auto& n = neighbors.at(static_cast<std::size_t>(i));
  return std::binary_search(n.begin(), n.end(), j);
}

std::vector<std::pair<int, int>> NeighborSet::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    for (int j : neighbors[i]) {
      if (static_cast<int>(i) < j) out.emplace_back(static_cast<int>(i), j);
    }
  }
  return out;
}

NeighborSet NeighborSet::restricted(std::span<const bool> active) const {
  NeighborSet out;
  out.neighbors.resize(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (!active[i]) continue;
    for (int j : neighbors[i]) {
      if (active[static_cast<std::size_t>(j)]) out.neighbors[i].push_back(j);
    }
  }
  return out;
}

NeighborSet discover_neighbors(std::span<const Vec3> positions, const Scene& scene) {
  NeighborSet out;
  const int n = static_cast<int>(positions.size());
  out.neighbors.resize(positions.size());
  // Test each unordered pair once; both directions get the same answer.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (line_of_sight(scene, positions[i], positions[j])) {
        out.neighbors[i].push_back(j);
        out.neighbors[j].push_back(i);
      }
    }
  }
  for (auto& v : out.neighbors) std::sort(v.begin(), v.end());
  return out;
}

std::vector<OccupancyMap> exchange_and_merge(const NeighborSet& neighbors, std::span<const OccupancyMap> maps) {
  if (neighbors.size() != maps.size()) throw ConfigError("neighbor set and map list differ in size");
  std::vector<OccupancyMap> out(maps.begin(), maps.end());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (int j : neighbors.neighbors[i]) out[i] = merge_maps(out[i], maps[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace coinspect
