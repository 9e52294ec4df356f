#include "coinspect/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace coinspect {

std::vector<std::vector<Vec3>> mapping_paths(const OperationalVolume& volume, std::span<const Vec3> starts,
                                             int n_explorers, double end_margin) {
  if (n_explorers < 1) throw ConfigError("mapping needs at least one explorer");
  if (starts.size() < static_cast<std::size_t>(n_explorers)) {
    throw ConfigError("mapping needs one start position per explorer");
  }
  const Vec3 ext = volume.extent();
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (ext[a] > ext[axis]) axis = a;
  }
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  // Bands split the longer remaining axis (lower index on ties); passes run at the middle of the other.
  int split = std::min(u, v);
  int mid = std::max(u, v);
  if (ext[mid] > ext[split]) std::swap(split, mid);

  const double lo_end = volume.lo[axis] + end_margin;
  const double hi_end = volume.hi[axis] - end_margin;
  std::vector<std::vector<Vec3>> out;
  for (int e = 0; e < n_explorers; ++e) {
    Vec3 a = Vec3::Zero();
    a[split] = volume.lo[split] + (e + 0.5) * ext[split] / n_explorers;
    a[mid] = volume.lo[mid] + 0.5 * ext[mid];
    Vec3 b = a;
    a[axis] = lo_end;
    b[axis] = hi_end;
    const Vec3& s = starts[static_cast<std::size_t>(e)];
    if (std::abs(s[axis] - b[axis]) < std::abs(s[axis] - a[axis])) std::swap(a, b);
    out.push_back({a, b, a});
  }
  return out;
}

std::vector<Waypoint> generate_waypoints(const OccupancyMap& map, std::span<const BoundingBox> boxes,
                                         const WaypointConfig& cfg) {
  const VoxelGrid& grid = map.grid();
  const double V = grid.voxel_size();
  const double standoff = cfg.standoff > 0.0 ? cfg.standoff : V;
  std::vector<Waypoint> out;
  std::set<std::pair<VoxelIndex, int>> seen;

  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (map.at(i) != CellState::Occupied) continue;
    const VoxelIndex occ = grid.from_linear(i);
    const Vec3 center = grid.voxel_to_world(occ);
    const bool inside = std::any_of(boxes.begin(), boxes.end(), [&](const BoundingBox& b) { return b.contains(center); });
    if (!inside) continue;

    for (int f = 0; f < 6; ++f) {
      const VoxelIndex step = kFaceSteps[f];
      const VoxelIndex first = occ + step;
      if (!grid.in_bounds(first) || map.at(first) != CellState::Free) continue;

      // Candidate standoff point, snapped to its voxel; fall back toward the occupied voxel
      // until the line of voxels from it is free and inside the grid.
      const Vec3 dir(step.x, step.y, step.z);
      int hops = std::max(1, static_cast<int>(std::floor((standoff + 0.5 * V) / V + 1e-9)));
      VoxelIndex chosen = first;
      for (; hops >= 1; --hops) {
        bool ok = true;
        for (int k = 1; k <= hops && ok; ++k) {
          const VoxelIndex c{occ.x + k * step.x, occ.y + k * step.y, occ.z + k * step.z};
          ok = grid.in_bounds(c) && map.at(c) == CellState::Free;
        }
        if (ok) {
          chosen = {occ.x + hops * step.x, occ.y + hops * step.y, occ.z + hops * step.z};
          break;
        }
      }
      const int inward = f ^ 1;  // opposite face: points from the waypoint back to the occupied voxel
      if (!seen.insert({chosen, inward}).second) continue;
      Waypoint w;
      w.voxel = chosen;
      w.position = grid.voxel_to_world(chosen);
      w.direction = -dir;
      w.source_voxel = occ;
      out.push_back(w);
    }
  }
  return out;
}

std::map<int, InspectionPath> mtsp_assign(std::span<const Waypoint> waypoints, std::span<const AgentPosition> positions) {
  if (positions.empty()) throw PlanningError("mTSP needs at least one agent position");
  std::vector<AgentPosition> agents(positions.begin(), positions.end());
  std::sort(agents.begin(), agents.end(), [](const AgentPosition& a, const AgentPosition& b) { return a.id < b.id; });

  std::map<int, InspectionPath> paths;
  std::vector<Vec3> last;
  for (const auto& a : agents) {
    paths[a.id].owner = a.id;
    last.push_back(a.position);
  }

  std::vector<bool> visited(waypoints.size(), false);
  std::size_t remaining = waypoints.size();
  while (remaining > 0) {
    for (std::size_t j = 0; j < agents.size() && remaining > 0; ++j) {
      std::size_t best = waypoints.size();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < waypoints.size(); ++l) {
        if (visited[l]) continue;
        const double d = (waypoints[l].position - last[j]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = l;
        }
      }
      visited[best] = true;
      --remaining;
      paths[agents[j].id].waypoints.push_back(waypoints[best]);
      last[j] = waypoints[best].position;
    }
  }
  return paths;
}

std::vector<VoxelIndex> dijkstra_path(const NavGraph& graph, const OccupancyMap& map,
                                      const std::set<VoxelIndex>& reserved, const VoxelIndex& start,
                                      const VoxelIndex& goal, UnknownPolicy unknown) {
  const VoxelGrid& grid = graph.grid();
  if (!grid.in_bounds(start) || !grid.in_bounds(goal)) throw RangeError("dijkstra_path: voxel outside the grid");
  if (map.at(start) == CellState::Occupied) throw PlanningError("dijkstra_path: start voxel is occupied");

  auto blocked = [&](const VoxelIndex& v) {
    const CellState s = map.at(v);
    if (s == CellState::Occupied) return true;
    if (s == CellState::Unknown && unknown == UnknownPolicy::Blocked) return true;
    return reserved.count(v) > 0;
  };
  if (start == goal) return {start};
  if (blocked(goal)) return {};

  const std::size_t n = grid.cell_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<VoxelIndex> pred(n);
  std::vector<bool> has_pred(n, false);
  std::vector<bool> done(n, false);

  using Entry = std::tuple<double, VoxelIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[grid.linear(start)] = 0.0;
  open.emplace(0.0, start);
  const double w = graph.edge_weight();

  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    const std::size_t ui = grid.linear(u);
    if (done[ui]) continue;
    done[ui] = true;
    if (u == goal) break;
    for (int f = 0; f < 6; ++f) {
      if (!graph.has_edge(u, f)) continue;
      const VoxelIndex nb = u + kFaceSteps[f];
      if (blocked(nb)) continue;
      const std::size_t ni = grid.linear(nb);
      if (done[ni]) continue;
      const double nd = d + w;
      if (nd < dist[ni] || (nd == dist[ni] && has_pred[ni] && u < pred[ni])) {
        const bool improved = nd < dist[ni];
        dist[ni] = nd;
        pred[ni] = u;
        has_pred[ni] = true;
        if (improved) open.emplace(nd, nb);
      }
    }
  }

  if (!done[grid.linear(goal)]) return {};
  std::vector<VoxelIndex> path{goal};
  while (path.back() != start) path.push_back(pred[grid.linear(path.back())]);
  std::reverse(path.begin(), path.end());
  return path;
}

LocalPlan drhlp_step(const VoxelIndex& agent_voxel, PathProgress& progress, const NavGraph& graph,
                     const OccupancyMap& map, const std::set<VoxelIndex>& reserved, int horizon,
                     UnknownPolicy unknown) {
  LocalPlan plan;
  const auto& wps = progress.path.waypoints;
  while (!progress.exhausted()) {
    const Waypoint& w = wps[progress.next];
    if (agent_voxel == w.voxel) {
      plan.receding = w;
      plan.reached = true;
      progress.visited.push_back(progress.next);
      ++progress.next;
      plan.epoch_complete = progress.exhausted();
      return plan;
    }
    const auto path = dijkstra_path(graph, map, reserved, agent_voxel, w.voxel, unknown);
    if (path.empty()) {
      plan.skipped.push_back(w);
      progress.skipped.push_back(progress.next);
      ++progress.next;
      continue;
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(horizon, 1)), path.size() - 1);
    plan.voxels.assign(path.begin() + 1, path.begin() + 1 + static_cast<std::ptrdiff_t>(take));
    plan.receding = w;
    return plan;
  }
  plan.epoch_complete = true;
  return plan;
}

}  // namespace coinspect
