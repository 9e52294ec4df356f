#pragma once

#include "coinspect/geometry.hpp"
#include "coinspect/world.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace coinspect {

/// Inspection pose: a free voxel center plus the unit direction toward the occupied voxel
/// that triggered it.
struct Waypoint {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  VoxelIndex voxel;
  VoxelIndex source_voxel;

  friend bool operator==(const Waypoint& a, const Waypoint& b) {
    return a.voxel == b.voxel && a.source_voxel == b.source_voxel && a.direction == b.direction;
  }
};

struct InspectionPath {
  int owner = 0;
  long epoch = 0;
  std::vector<Waypoint> waypoints;
};

/// Straight out-and-back passes along the volume's longest axis, one per explorer, through
/// the centers of equal bands of the cross-section. Each path is [near end, far end, near end]
/// relative to that explorer's start. Ends sit `end_margin` inside the volume faces.
std::vector<std::vector<Vec3>> mapping_paths(const OperationalVolume& volume, std::span<const Vec3> starts,
                                             int n_explorers, double end_margin = 0.0);

struct WaypointConfig {
  double standoff = 0.0;  // <= 0 means one voxel
};

std::vector<Waypoint> generate_waypoints(const OccupancyMap& map, std::span<const BoundingBox> boxes,
                                         const WaypointConfig& cfg = {});

struct AgentPosition {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

/// Greedy round-robin nearest-neighbor assignment. Agents take turns in ascending id; ties
/// go to the lowest waypoint index. The returned paths partition `waypoints`.
std::map<int, InspectionPath> mtsp_assign(std::span<const Waypoint> waypoints, std::span<const AgentPosition> positions);

enum class UnknownPolicy { Traversable, Blocked };

/// Shortest voxel path start..goal (both included) avoiding Occupied and reserved voxels.
/// Equal-cost alternatives resolve to the lexicographically smallest predecessor.
/// Empty when unreachable. Throws PlanningError when the start is Occupied.
std::vector<VoxelIndex> dijkstra_path(const NavGraph& graph, const OccupancyMap& map,
                                      const std::set<VoxelIndex>& reserved, const VoxelIndex& start,
                                      const VoxelIndex& goal, UnknownPolicy unknown = UnknownPolicy::Traversable);

struct PathProgress {
  InspectionPath path;
  std::size_t next = 0;
  std::vector<std::size_t> visited;
  std::vector<std::size_t> skipped;

  bool exhausted() const { return next >= path.waypoints.size(); }
};

struct LocalPlan {
  std::vector<VoxelIndex> voxels;  // at most `horizon` voxels after the current one
  std::optional<Waypoint> receding;
  bool reached = false;
  bool epoch_complete = false;
  std::vector<Waypoint> skipped;
};

/// One receding-horizon step toward the current waypoint of `progress`. Reaching the
/// waypoint's voxel marks it visited; unreachable waypoints are skipped.
LocalPlan drhlp_step(const VoxelIndex& agent_voxel, PathProgress& progress, const NavGraph& graph,
                     const OccupancyMap& map, const std::set<VoxelIndex>& reserved, int horizon,
                     UnknownPolicy unknown = UnknownPolicy::Traversable);

}  // namespace coinspect
