#include "coinspect/engine.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace coinspect {

namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot open {} for writing", path.string()));
  os << bytes;
  if (!os) throw Error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::string render_summary(const MissionResult& r) {
  nlohmann::ordered_json j;
  j["Q"] = r.Q;
  j["interest_points"] = r.ledger.size();
  j["points_observed"] = r.ledger.observed_count();
  j["average_quality"] = r.ledger.average();
  j["quality_floor"] = r.ledger.quality_floor();
  j["ticks"] = r.ticks;
  j["observations"] = r.observations.size();
  j["grid"] = {{"origin", vec_json(r.grid.origin())},
               {"dims", r.grid.dims()},
               {"voxel_size", r.grid.voxel_size()}};
  j["safety"] = {{"agent_agent_same_voxel", r.safety.agent_agent_same_voxel},
                 {"occupied_voxel_entries", r.safety.occupied_voxel_entries},
                 {"obstacle_crossings", r.safety.obstacle_crossings},
                 {"unclaimed_voxel_entries", r.safety.unclaimed_voxel_entries},
                 {"out_of_grid", r.safety.out_of_grid},
                 {"total", r.safety.total()}};
  auto agents = nlohmann::ordered_json::array();
  for (const auto& a : r.agents) {
    agents.push_back({{"id", a.id},
                      {"kind", to_string(a.kind)},
                      {"final_position", vec_json(a.final_position)},
                      {"epochs", a.epochs},
                      {"waypoints_visited", a.waypoints_visited},
                      {"waypoints_skipped", a.waypoints_skipped},
                      {"phase2_start", a.phase2_start},
                      {"distance_flown", a.distance_flown}});
  }
  j["agents"] = std::move(agents);
  j["plans"] = r.plans.size();
  return j.dump(2) + "\n";
}

std::string render_score_trace(const MissionResult& r) {
  std::string out = "timestep,time,average_quality,Q\n";
  for (const auto& s : r.score_trace) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", s.timestep, s.time, s.average_quality, s.score);
  }
  return out;
}

std::string render_observations(const MissionResult& r) {
  std::string out = "timestep,agent,point_id,q_blur,q_res,q\n";
  for (const auto& o : r.observations) {
    out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", o.timestep, o.agent_id, o.point_id, o.q_blur, o.q_res, o.q);
  }
  return out;
}

std::string render_heatmap(const MissionResult& r, const Scene& scene) {
  std::string out = "point_id,x,y,z,nx,ny,nz,count,best_q\n";
  for (const auto& h : intensity_heatmap(r.ledger, scene)) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", h.point_id, h.position.x(),
                       h.position.y(), h.position.z(), h.normal.x(), h.normal.y(), h.normal.z(), h.count, h.best_q);
  }
  return out;
}

std::string render_connectivity(const MissionResult& r) {
  std::string out = "timestep,edges\n";
  for (const auto& c : r.connectivity) {
    out += fmt::format("{},", c.timestep);
    for (std::size_t e = 0; e < c.edges.size(); ++e) {
      out += fmt::format("{}{}-{}", e ? ";" : "", c.edges[e].first, c.edges[e].second);
    }
    out += '\n';
  }
  return out;
}

std::string render_plans(const MissionResult& r) {
  std::string out;
  for (const auto& p : r.plans) {
    out += fmt::format("plan timestep={} agent={} epoch={} waypoints={} assigned={} length={:.17g} participants={}\n",
                       p.timestep, p.agent, p.epoch, p.waypoint_count, p.assigned, p.path_length,
                       fmt::join(p.participants, ","));
  }
  for (const auto& e : r.plan_events) out += fmt::format("event {}\n", e);
  return out;
}

std::vector<std::string> write_outputs(const MissionResult& r, const Scene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "maps");
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(root / name, bytes);
    written.push_back(name);
  };
  emit("mission_result.json", render_summary(r));
  emit("score_trace.csv", render_score_trace(r));
  emit("observations.csv", render_observations(r));
  emit("heatmap.csv", render_heatmap(r, scene));
  emit("connectivity.csv", render_connectivity(r));
  emit("plans.log", render_plans(r));
  for (const auto& m : r.maps) {
    const std::string name = fmt::format("maps/{}.map", m.name);
    save_map((root / name).string(), m.map);
    written.push_back(name);
  }
  return written;
}

std::string result_digest(const MissionResult& r, const Scene& scene) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(render_summary(r));
  feed(render_score_trace(r));
  feed(render_observations(r));
  feed(render_heatmap(r, scene));
  feed(render_connectivity(r));
  feed(render_plans(r));
  for (const auto& m : r.maps) {
    std::ostringstream os;
    write_map(os, m.map);
    feed(m.name);
    feed(os.str());
  }
  return fmt::format("{:016x}", h);
}

}  // namespace coinspect
