#include "coinspect/engine.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <optional>

namespace coinspect {

int MissionConfig::explorer_count() const {
  return static_cast<int>(std::count_if(roster.begin(), roster.end(), [](const AgentConfig& a) { return a.kind == AgentKind::Explorer; }));
}

int MissionConfig::photographer_count() const { return static_cast<int>(roster.size()) - explorer_count(); }

long MissionConfig::tick_count() const { return static_cast<long>(std::ceil(duration / tick - 1e-9)); }

void MissionConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("mission duration must be positive");
  if (!(tick > 0.0)) throw ConfigError("tick must be positive");
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  if (horizon < 1) throw ConfigError("horizon must be at least one voxel");
  if (capture_stride < 1) throw ConfigError("capture stride must be at least one");
  if (capture_speed < 0.0 || max_dwell < 0.0) throw ConfigError("capture speed and dwell must be non-negative");
  const int ne = explorer_count();
  if (ne < 1 || ne > 2) throw ConfigError(fmt::format("explorer count is {}; N_e ∈ {{1,2}}", ne));
  camera.validate();
  lidar.validate();
  for (const auto& a : roster) {
    if (!(a.limits.v_max > 0.0 && a.limits.a_max > 0.0)) throw ConfigError("agent speed and acceleration limits must be positive");
    if (!(a.limits.yaw_rate_max > 0.0 && a.limits.yaw_accel_max > 0.0)) throw ConfigError("agent yaw limits must be positive");
    if (!(a.gimbal.inclination_min <= a.gimbal.inclination_max && a.gimbal.azimuth_min <= a.gimbal.azimuth_max)) {
      throw ConfigError("gimbal limits are inverted");
    }
  }
}

namespace {

enum class Phase { Mapping, Waiting, Inspecting };

struct Runtime {
  AgentConfig cfg;
  AgentState state;
  GimbalState gimbal;
  OccupancyMap map;
  Phase phase = Phase::Waiting;
  PathProgress progress;
  bool has_progress = false;
  long epoch = -1;
  std::deque<VoxelIndex> local;
  std::vector<VoxelIndex> claims;  // front: the voxel the agent is in; rest: committed voxels ahead
  std::optional<Waypoint> receding;
  double dwell = 0.0;
  bool aborting = false;
  AgentSummary summary;
};

bool is_face_step(const VoxelIndex& d) { return std::abs(d.x) + std::abs(d.y) + std::abs(d.z) == 1; }

class Mission {
 public:
  Mission(const MissionConfig& cfg, const Scene& scene);
  MissionResult run();

 private:
  void sense(double t);
  NeighborSet communicate(long k, double t);
  void plan(long k, double t, const NeighborSet& los);
  void act();
  void capture(long k, double t);

  void start_epoch(std::size_t i, long k, const NeighborSet& los);
  bool claimed_by_other(const VoxelIndex& v, std::size_t self) const;
  void claim_run(std::size_t i);
  std::optional<double> desired_yaw(const Runtime& r, const Vec3& target) const;
  void event(long k, std::string text);

  const MissionConfig& cfg_;
  const Scene& scene_;
  VoxelGrid grid_;
  std::vector<std::uint8_t> truth_;
  std::vector<Runtime> agents_;
  ScoreLedger ledger_;
  MissionResult result_;
};

Mission::Mission(const MissionConfig& cfg, const Scene& scene) : cfg_(cfg), scene_(scene) {
  cfg_.validate();
  if (cfg_.roster.empty()) throw ConfigError("roster is empty");
  if (scene_.inspection_boxes.empty()) throw ConfigError("scene has no inspection boxes");

  std::vector<Vec3> starts;
  for (const auto& a : cfg_.roster) starts.push_back(a.start);
  const double V = cfg_.voxel_size;
  const OperationalVolume volume = compute_operational_volume(scene_.inspection_boxes, starts, V);
  grid_ = build_grid(volume, V);
  truth_ = ground_truth_occupancy(scene_, grid_);

  std::vector<Vec3> explorer_starts;
  for (const auto& a : cfg_.roster) {
    if (a.kind == AgentKind::Explorer) explorer_starts.push_back(a.start);
  }
  const auto sweeps = mapping_paths(volume, explorer_starts, static_cast<int>(explorer_starts.size()), 0.5 * V);

  std::size_t explorer_slot = 0;
  for (std::size_t i = 0; i < cfg_.roster.size(); ++i) {
    const AgentConfig& ac = cfg_.roster[i];
    Runtime r;
    r.cfg = ac;
    r.state.id = static_cast<int>(i);
    r.state.kind = ac.kind;
    r.state.position = ac.start;
    r.state.yaw = wrap_angle(ac.start_yaw);
    r.map = OccupancyMap(grid_);
    const VoxelIndex v = grid_.world_to_voxel(ac.start);
    if (truth_[grid_.linear(v)]) throw ConfigError(fmt::format("agent {} starts inside an obstructed voxel", i));
    for (const auto& other : agents_) {
      if (other.claims.front() == v) throw ConfigError(fmt::format("agents {} and {} start in the same voxel", other.state.id, i));
    }
    r.claims = {v};
    r.summary.id = static_cast<int>(i);
    r.summary.kind = ac.kind;

    if (ac.kind == AgentKind::Explorer) {
      r.phase = Phase::Mapping;
      InspectionPath sweep;
      sweep.owner = r.state.id;
      const auto& pts = sweeps[explorer_slot++];
      for (std::size_t p = 0; p < pts.size(); ++p) {
        Waypoint w;
        w.voxel = grid_.world_to_voxel(pts[p]);
        if (!sweep.waypoints.empty() && sweep.waypoints.back().voxel == w.voxel) continue;
        w.position = grid_.voxel_to_world(w.voxel);
        w.source_voxel = w.voxel;
        const Vec3 along = p + 1 < pts.size() ? Vec3(pts[p + 1] - pts[p]) : Vec3(pts[p] - pts[p - 1]);
        w.direction = along.norm() > 0.0 ? Vec3(along.normalized()) : Vec3::UnitX();
        sweep.waypoints.push_back(w);
      }
      r.progress = PathProgress{sweep, 0, {}, {}};
      r.has_progress = true;
    }
    agents_.push_back(std::move(r));
  }

  ledger_ = ScoreLedger(scene_.interest_points, cfg_.camera.quality_floor);
  result_.grid = grid_;
}

void Mission::event(long k, std::string text) {
  spdlog::debug("t={:.1f}s {}", static_cast<double>(k) * cfg_.tick, text);
  result_.plan_events.push_back(fmt::format("{} {}", k, text));
}

void Mission::sense(double t) {
  for (auto& r : agents_) {
    if (r.state.kind != AgentKind::Explorer) continue;
    const LidarSweep sweep = lidar_sweep(r.state, scene_, cfg_.lidar, t);
    if (cfg_.lidar.clear_on_miss) clear_beams(r.map, r.state.position, sweep.misses);
    integrate_points(r.map, r.state.position, sweep.hits);
  }
}

NeighborSet Mission::communicate(long k, double t) {
  std::vector<Vec3> positions;
  for (const auto& r : agents_) positions.push_back(r.state.position);
  NeighborSet los = discover_neighbors(positions, scene_);
  result_.connectivity.push_back({k, los.edges()});

  // Explorers keep their map to themselves until their sweep is done.
  const auto active = std::make_unique<bool[]>(agents_.size());
  std::vector<OccupancyMap> maps;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    active[i] = agents_[i].phase != Phase::Mapping;
    maps.push_back(agents_[i].map);
  }
  auto merged = exchange_and_merge(los.restricted({active.get(), agents_.size()}), maps);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].map = std::move(merged[i]);
    Runtime& r = agents_[i];
    if (r.phase == Phase::Waiting && !r.map.empty_of_knowledge()) {
      r.phase = Phase::Inspecting;
      r.summary.phase2_start = t;
      event(k, fmt::format("agent {} received the initial map", i));
    }
  }
  return los;
}

void Mission::start_epoch(std::size_t i, long k, const NeighborSet& los) {
  Runtime& r = agents_[i];
  WaypointConfig wc;
  wc.standoff = cfg_.waypoint_standoff;
  const auto waypoints = generate_waypoints(r.map, scene_.inspection_boxes, wc);

  std::vector<AgentPosition> positions{{r.state.id, r.state.position}};
  for (int j : los.neighbors[i]) {
    const Runtime& o = agents_[static_cast<std::size_t>(j)];
    if (o.phase == Phase::Inspecting) positions.push_back({o.state.id, o.state.position});
  }
  auto assignment = mtsp_assign(waypoints, positions);
  InspectionPath sigma = std::move(assignment[r.state.id]);
  ++r.epoch;
  sigma.epoch = r.epoch;
  r.progress = PathProgress{std::move(sigma), 0, {}, {}};
  r.has_progress = true;
  r.summary.epochs = r.epoch + 1;

  PlanRecord rec;
  rec.timestep = k;
  rec.agent = r.state.id;
  rec.epoch = r.epoch;
  rec.waypoint_count = waypoints.size();
  for (const auto& p : positions) rec.participants.push_back(p.id);
  std::sort(rec.participants.begin(), rec.participants.end());
  rec.assigned = r.progress.path.waypoints.size();
  Vec3 prev = r.state.position;
  for (const auto& w : r.progress.path.waypoints) {
    rec.path_length += (w.position - prev).norm();
    prev = w.position;
  }
  result_.plans.push_back(std::move(rec));
}

void Mission::plan(long k, double t, const NeighborSet& los) {
  // Reservations come from the claims held at the start of the tick.
  std::vector<std::vector<VoxelIndex>> snapshot;
  for (const auto& r : agents_) snapshot.push_back(r.claims);

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Runtime& r = agents_[i];
    if (r.phase == Phase::Waiting) continue;

    if (r.claims.size() > 1) {
      for (std::size_t c = 1; c < r.claims.size(); ++c) {
        if (r.map.at(r.claims[c]) == CellState::Occupied) {
          r.aborting = true;
          r.local.clear();
          event(k, fmt::format("agent {} aborts a hop into newly occupied voxel {}", i, r.claims[c]));
          break;
        }
      }
      // In transit: plan ahead from the end of the run so a straight continuation can extend
      // it, unless the run already ends at the waypoint being approached.
      const bool lookahead = !r.aborting && r.local.empty() && r.receding && r.has_progress &&
                             !r.progress.exhausted() && r.claims.back() != r.progress.path.waypoints[r.progress.next].voxel &&
                             r.claims.size() <= static_cast<std::size_t>(cfg_.horizon);
      if (!lookahead) continue;
    } else {
      if (r.aborting || !r.local.empty()) continue;

      // Hold inside a waypoint's voxel until the camera is steady enough to capture.
      if (r.phase == Phase::Inspecting && r.has_progress && !r.progress.exhausted()) {
        const Waypoint& w = r.progress.path.waypoints[r.progress.next];
        if (w.voxel == r.claims.front() && r.state.velocity.norm() > cfg_.capture_speed && r.dwell < cfg_.max_dwell) {
          r.receding = w;
          r.dwell += cfg_.tick;
          continue;
        }
      }
      r.dwell = 0.0;
    }
    const VoxelIndex from = r.claims.back();

    std::set<VoxelIndex> reserved;
    for (int j : los.neighbors[i]) {
      for (const auto& v : snapshot[static_cast<std::size_t>(j)]) reserved.insert(v);
    }
    const NavGraph graph = build_graph(grid_, r.map);
    const UnknownPolicy unknown =
        r.state.kind == AgentKind::Explorer ? UnknownPolicy::Traversable : UnknownPolicy::Blocked;

    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!r.has_progress || r.progress.exhausted()) {
        if (r.phase == Phase::Mapping) {
          r.phase = Phase::Inspecting;
          r.summary.phase2_start = t;
          result_.maps.push_back({fmt::format("agent{}_phase1", i), r.map});
          event(k, fmt::format("agent {} finished its mapping sweep", i));
          // The first inspection epoch waits one tick so photographers in range hold the same
          // map and all of them partition identical waypoint sets.
          r.has_progress = false;
          break;
        }
        start_epoch(i, k, los);
      }
      LocalPlan lp;
      try {
        lp = drhlp_step(from, r.progress, graph, r.map, reserved, cfg_.horizon, unknown);
      } catch (const PlanningError& e) {
        throw PlanningError(fmt::format("agent {} at tick {}: {}", i, k, e.what()));
      }
      for (const auto& w : lp.skipped) {
        ++r.summary.waypoints_skipped;
        event(k, fmt::format("agent {} skips unreachable waypoint {}", i, w.voxel));
      }
      if (lp.receding) r.receding = lp.receding;
      if (lp.reached && r.phase == Phase::Inspecting) ++r.summary.waypoints_visited;
      if (!lp.voxels.empty()) {
        r.local.assign(lp.voxels.begin(), lp.voxels.end());
        break;
      }
      if (lp.reached) break;
    }
  }
}

bool Mission::claimed_by_other(const VoxelIndex& v, std::size_t self) const {
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j == self) continue;
    const auto& c = agents_[j].claims;
    if (std::find(c.begin(), c.end(), v) != c.end()) return true;
  }
  return false;
}

void Mission::claim_run(std::size_t i) {
  Runtime& r = agents_[i];
  const std::size_t n = r.claims.size();
  VoxelIndex prev = r.claims.back();
  std::optional<VoxelIndex> heading;
  if (n > 1) heading = VoxelIndex{prev.x - r.claims[n - 2].x, prev.y - r.claims[n - 2].y, prev.z - r.claims[n - 2].z};
  while (!r.local.empty() && r.claims.size() <= static_cast<std::size_t>(cfg_.horizon)) {
    const VoxelIndex v = r.local.front();
    const VoxelIndex d{v.x - prev.x, v.y - prev.y, v.z - prev.z};
    if (!is_face_step(d) || (heading && d != *heading)) break;
    if (claimed_by_other(v, i) || r.map.at(v) == CellState::Occupied) break;
    r.claims.push_back(v);
    r.local.pop_front();
    prev = v;
    heading = d;
  }
  // Nothing claimable from a standstill: drop the plan and try again next tick.
  if (r.claims.size() == 1) r.local.clear();
}

std::optional<double> Mission::desired_yaw(const Runtime& r, const Vec3& target) const {
  const Vec3 aim = r.receding ? r.receding->position : target;
  const Vec3 d = aim - r.state.position;
  if (std::hypot(d.x(), d.y()) > 0.5 * cfg_.voxel_size) return std::atan2(d.y(), d.x());
  if (r.receding && std::hypot(r.receding->direction.x(), r.receding->direction.y()) > 1e-9) {
    return std::atan2(r.receding->direction.y(), r.receding->direction.x());
  }
  return r.state.yaw;
}

void Mission::act() {
  std::vector<VoxelIndex> voxels;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Runtime& r = agents_[i];
    Vec3 target;
    if (r.phase == Phase::Waiting) {
      target = r.cfg.start;
    } else {
      if (r.aborting && r.state.velocity.norm() < 0.05 && grid_.contains(r.state.position) &&
          grid_.world_to_voxel(r.state.position) == r.claims.front()) {
        r.claims.resize(1);
        r.aborting = false;
      }
      if (!r.aborting && !r.local.empty()) claim_run(i);
      target = grid_.voxel_to_world(r.aborting ? r.claims.front() : r.claims.back());
    }

    const Vec3 before = r.state.position;
    const ControlInput u = track_segment(r.state, target, r.cfg.limits, desired_yaw(r, target));
    r.state = step_dynamics(r.state, u, cfg_.tick, r.cfg.limits);
    r.summary.distance_flown += (r.state.position - before).norm();

    if (r.phase == Phase::Inspecting && r.receding) {
      r.gimbal = point_gimbal(r.gimbal, r.state, r.receding->direction, r.cfg.gimbal);
    } else {
      r.gimbal = clamp_gimbal(GimbalState{}, r.cfg.gimbal);
    }

    // Audits.
    if (!line_of_sight(scene_, before, r.state.position)) ++result_.safety.obstacle_crossings;
    if (!grid_.contains(r.state.position)) {
      ++result_.safety.out_of_grid;
      voxels.push_back(r.claims.front());
      continue;
    }
    const VoxelIndex v = grid_.world_to_voxel(r.state.position);
    if (v != r.claims.front()) {
      const auto it = std::find(r.claims.begin(), r.claims.end(), v);
      if (it != r.claims.end()) {
        r.claims.erase(r.claims.begin(), it);
      } else {
        ++result_.safety.unclaimed_voxel_entries;
        r.claims = {v};
        r.local.clear();
      }
      if (truth_[grid_.linear(v)]) ++result_.safety.occupied_voxel_entries;
    }
    voxels.push_back(v);
  }

  for (std::size_t a = 0; a < voxels.size(); ++a) {
    for (std::size_t b = a + 1; b < voxels.size(); ++b) {
      if (voxels[a] == voxels[b]) ++result_.safety.agent_agent_same_voxel;
    }
  }
  result_.voxel_log.push_back(std::move(voxels));
}

void Mission::capture(long k, double t) {
  if (k % cfg_.capture_stride == 0) {
    for (const auto& r : agents_) {
      const auto obs = observe(r.state, r.gimbal, scene_, cfg_.camera, k);
      ledger_.update(obs);
      if (cfg_.record_observations) result_.observations.insert(result_.observations.end(), obs.begin(), obs.end());
    }
  }
  result_.score_trace.push_back({k, t, ledger_.average(), ledger_.score()});
}

MissionResult Mission::run() {
  const long ticks = cfg_.tick_count();
  for (long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * cfg_.tick;
    sense(t);
    const NeighborSet los = communicate(k, t);
    plan(k, t, los);
    act();
    capture(k, t);
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Runtime& r = agents_[i];
    r.summary.final_position = r.state.position;
    result_.agents.push_back(r.summary);
    result_.maps.push_back({fmt::format("agent{}_final", i), r.map});
  }
  result_.ticks = ticks;
  result_.Q = ledger_.score();
  result_.ledger = std::move(ledger_);
  return std::move(result_);
}

}  // namespace

MissionResult run_mission(const MissionConfig& cfg, const Scene& scene) {
  Mission m(cfg, scene);
  return m.run();
}

}  // namespace coinspect
