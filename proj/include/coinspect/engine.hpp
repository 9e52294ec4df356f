#pragma once

#include "coinspect/agents.hpp"
#include "coinspect/comms.hpp"
#include "coinspect/planning.hpp"
#include "coinspect/scene.hpp"
#include "coinspect/sensors.hpp"
#include "coinspect/world.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace coinspect {

struct AgentConfig {
  AgentKind kind = AgentKind::Photographer;
  Vec3 start = Vec3::Zero();
  double start_yaw = 0.0;
  MotionLimits limits = default_limits(AgentKind::Photographer);
  GimbalLimits gimbal;
};

struct MissionConfig {
  double duration = 120.0;  // s
  double tick = 0.1;        // s
  double voxel_size = 6.0;  // m
  int horizon = 3;          // voxels executed per local plan
  double waypoint_standoff = 0.0;  // m; <= 0 means one voxel
  // A waypoint counts as visited once the agent is inside its voxel and slower than this,
  // or after max_dwell seconds there.
  double capture_speed = 0.5;
  double max_dwell = 4.0;
  int capture_stride = 1;  // camera frames every N ticks
  std::uint64_t seed = 0;
  bool record_observations = true;
  CameraConfig camera;
  LidarConfig lidar;
  std::vector<AgentConfig> roster;

  int explorer_count() const;
  int photographer_count() const;
  long tick_count() const;
  void validate() const;
};

struct PointRecord {
  double best_q = 0.0;
  double best_q_blur = 0.0;
  double best_q_res = 0.0;
  long best_timestep = -1;
  int best_agent = -1;
  long count = 0;
};

/// Best observation per interest point over all agents and frames, gated by the quality floor.
class ScoreLedger {
 public:
  ScoreLedger() = default;
  ScoreLedger(std::span<const InterestPoint> points, double quality_floor);

  /// Throws RangeError for an unknown point id.
  void update(std::span<const Observation> observations);

  const PointRecord& record(int point_id) const;
  std::span<const int> point_ids() const { return ids_; }
  std::span<const PointRecord> records() const { return records_; }
  double quality_floor() const { return floor_; }
  std::size_t size() const { return ids_.size(); }
  double score() const;
  double average() const;
  std::size_t observed_count() const;

 private:
  double floor_ = 0.0;
  std::vector<int> ids_;
  std::vector<PointRecord> records_;
  std::unordered_map<int, std::size_t> index_;
};

ScoreLedger& update_ledger(ScoreLedger& ledger, std::span<const Observation> observations);
double inspection_score(const ScoreLedger& ledger);

struct IntensityRecord {
  int point_id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  long count = 0;
  double best_q = 0.0;
};

std::vector<IntensityRecord> intensity_heatmap(const ScoreLedger& ledger, const Scene& scene);

/// Replays an observation log into the per-tick mean of best-so-far quality.
std::vector<double> average_quality_trace(std::span<const Observation> log, std::span<const InterestPoint> points,
                                          double quality_floor, long ticks);

struct TraceSample {
  long timestep = 0;
  double time = 0.0;
  double average_quality = 0.0;
  double score = 0.0;
};

struct ConnectivitySample {
  long timestep = 0;
  std::vector<std::pair<int, int>> edges;  // agent ids
};

struct PlanRecord {
  long timestep = 0;
  int agent = 0;
  long epoch = 0;
  std::size_t waypoint_count = 0;
  std::vector<int> participants;
  std::size_t assigned = 0;
  double path_length = 0.0;
};

struct SafetyCounters {
  long agent_agent_same_voxel = 0;
  long occupied_voxel_entries = 0;
  long obstacle_crossings = 0;
  long unclaimed_voxel_entries = 0;
  long out_of_grid = 0;

  long total() const {
    return agent_agent_same_voxel + occupied_voxel_entries + obstacle_crossings + unclaimed_voxel_entries + out_of_grid;
  }
};

struct AgentSummary {
  int id = 0;
  AgentKind kind = AgentKind::Photographer;
  Vec3 final_position = Vec3::Zero();
  long epochs = 0;
  long waypoints_visited = 0;
  long waypoints_skipped = 0;
  double phase2_start = -1.0;  // s; -1 if never entered
  double distance_flown = 0.0;
};

struct MapSnapshot {
  std::string name;
  OccupancyMap map;
};

// One entry per tick: the voxel of every agent after the move. Used for log audits.
using VoxelLog = std::vector<std::vector<VoxelIndex>>;

struct MissionResult {
  double Q = 0.0;
  ScoreLedger ledger;
  std::vector<TraceSample> score_trace;
  std::vector<Observation> observations;
  std::vector<ConnectivitySample> connectivity;
  std::vector<PlanRecord> plans;
  std::vector<std::string> plan_events;
  SafetyCounters safety;
  std::vector<AgentSummary> agents;
  std::vector<MapSnapshot> maps;
  VoxelGrid grid;
  VoxelLog voxel_log;
  long ticks = 0;
};

/// Runs both mission phases to the configured duration. Deterministic for a fixed config and scene.
MissionResult run_mission(const MissionConfig& cfg, const Scene& scene);

// Output files. Each render function returns the exact bytes write_outputs stores.
std::string render_summary(const MissionResult& r);
std::string render_score_trace(const MissionResult& r);
std::string render_observations(const MissionResult& r);
std::string render_heatmap(const MissionResult& r, const Scene& scene);
std::string render_connectivity(const MissionResult& r);
std::string render_plans(const MissionResult& r);

/// Writes every output file under `dir` (created if missing) and returns the file names.
std::vector<std::string> write_outputs(const MissionResult& r, const Scene& scene, const std::string& dir);

/// FNV-1a over all rendered outputs, hex encoded.
std::string result_digest(const MissionResult& r, const Scene& scene);

}  // namespace coinspect
