#include "coinspect/scenario.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace coinspect {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) throw ConfigError(msg);
  throw ConfigError(fmt::format("line {}: {}", m.line + 1, msg));
}

void check_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!n.IsMap()) fail(n, fmt::format("{} must be a mapping", where));
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
T scalar(const YAML::Node& n, std::string_view what) {
  if (!n.IsScalar()) fail(n, fmt::format("{} must be a scalar", what));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, fmt::format("{} has an invalid value '{}'", what, n.Scalar()));
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, T& out) {
  if (const YAML::Node n = parent[key]) out = scalar<T>(n, key);
}

void read_deg(const YAML::Node& parent, const char* key, double& radians) {
  if (const YAML::Node n = parent[key]) radians = deg2rad(scalar<double>(n, key));
}

Vec3 vec3(const YAML::Node& n, std::string_view what) {
  if (!n.IsSequence() || n.size() != 3) fail(n, fmt::format("{} must be a list of three numbers", what));
  return {scalar<double>(n[0], what), scalar<double>(n[1], what), scalar<double>(n[2], what)};
}

BoundingBox box(const YAML::Node& n, std::string_view what) {
  check_keys(n, {"min", "max"}, what);
  if (!n["min"] || !n["max"]) fail(n, fmt::format("{} needs min and max", what));
  BoundingBox b{vec3(n["min"], what), vec3(n["max"], what)};
  if (!b.valid()) fail(n, fmt::format("{} has min not below max", what));
  return b;
}

std::vector<BoundingBox> boxes(const YAML::Node& parent, const char* key) {
  std::vector<BoundingBox> out;
  const YAML::Node n = parent[key];
  if (!n) return out;
  if (!n.IsSequence()) fail(n, fmt::format("{} must be a list", key));
  for (const auto& b : n) out.push_back(box(b, key));
  return out;
}

AgentKind agent_kind(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "kind");
  if (s == "explorer") return AgentKind::Explorer;
  if (s == "photographer") return AgentKind::Photographer;
  fail(n, fmt::format("agent kind must be explorer or photographer, got '{}'", s));
}

void read_mission(const YAML::Node& n, MissionConfig& cfg) {
  check_keys(n, {"duration", "tick", "voxel_size", "quality_floor", "seed", "horizon", "waypoint_standoff",
                 "capture_speed", "max_dwell", "capture_stride", "record_observations"},
             "mission");
  read(n, "duration", cfg.duration);
  read(n, "tick", cfg.tick);
  read(n, "voxel_size", cfg.voxel_size);
  read(n, "quality_floor", cfg.camera.quality_floor);
  read(n, "seed", cfg.seed);
  read(n, "horizon", cfg.horizon);
  read(n, "waypoint_standoff", cfg.waypoint_standoff);
  read(n, "capture_speed", cfg.capture_speed);
  read(n, "max_dwell", cfg.max_dwell);
  read(n, "capture_stride", cfg.capture_stride);
  read(n, "record_observations", cfg.record_observations);
}

void read_camera(const YAML::Node& n, CameraConfig& c) {
  check_keys(n, {"fov_h_deg", "fov_v_deg", "range", "focal", "pixel_width", "exposure", "desired_resolution"}, "camera");
  read_deg(n, "fov_h_deg", c.fov_h);
  read_deg(n, "fov_v_deg", c.fov_v);
  read(n, "range", c.range);
  read(n, "focal", c.focal);
  read(n, "pixel_width", c.pixel_width);
  read(n, "exposure", c.exposure);
  read(n, "desired_resolution", c.desired_resolution);
}

void read_lidar(const YAML::Node& n, LidarConfig& l) {
  check_keys(n, {"range", "beams", "azimuth_steps", "vertical_aperture_deg", "servo_period", "servo_min_deg", "servo_max_deg",
                 "clear_on_miss"},
             "lidar");
  read(n, "range", l.range);
  read(n, "beams", l.beams);
  read(n, "azimuth_steps", l.azimuth_steps);
  read_deg(n, "vertical_aperture_deg", l.vertical_aperture);
  read(n, "servo_period", l.servo_period);
  read_deg(n, "servo_min_deg", l.servo_min);
  read_deg(n, "servo_max_deg", l.servo_max);
  read(n, "clear_on_miss", l.clear_on_miss);
}

AgentConfig read_agent(const YAML::Node& n) {
  check_keys(n, {"kind", "start", "start_yaw_deg", "v_max", "a_max", "yaw_rate_max", "yaw_accel_max", "gimbal"}, "roster entry");
  if (!n["kind"] || !n["start"]) fail(n, "roster entry needs kind and start");
  AgentConfig a;
  a.kind = agent_kind(n["kind"]);
  a.limits = default_limits(a.kind);
  a.start = vec3(n["start"], "start");
  read_deg(n, "start_yaw_deg", a.start_yaw);
  read(n, "v_max", a.limits.v_max);
  read(n, "a_max", a.limits.a_max);
  read(n, "yaw_rate_max", a.limits.yaw_rate_max);
  read(n, "yaw_accel_max", a.limits.yaw_accel_max);
  if (const YAML::Node g = n["gimbal"]) {
    check_keys(g, {"inclination_min_deg", "inclination_max_deg", "azimuth_min_deg", "azimuth_max_deg"}, "gimbal");
    read_deg(g, "inclination_min_deg", a.gimbal.inclination_min);
    read_deg(g, "inclination_max_deg", a.gimbal.inclination_max);
    read_deg(g, "azimuth_min_deg", a.gimbal.azimuth_min);
    read_deg(g, "azimuth_max_deg", a.gimbal.azimuth_max);
  }
  return a;
}

Triangle read_triangle(const YAML::Node& n) {
  if (!n.IsSequence() || n.size() != 3) fail(n, "a triangle is a list of three vertices");
  return {vec3(n[0], "triangle vertex"), vec3(n[1], "triangle vertex"), vec3(n[2], "triangle vertex")};
}

void read_scene(const YAML::Node& n, std::uint64_t default_seed, Scene& scene) {
  check_keys(n, {"solids", "shells", "triangles", "inspection_boxes", "interest_points"}, "scene");
  scene.solids = boxes(n, "solids");
  const auto shells = boxes(n, "shells");
  for (const auto& s : shells) {
    const auto tris = box_shell(s);
    scene.triangles.insert(scene.triangles.end(), tris.begin(), tris.end());
  }
  if (const YAML::Node t = n["triangles"]) {
    if (!t.IsSequence()) fail(t, "triangles must be a list");
    for (const auto& tri : t) scene.triangles.push_back(read_triangle(tri));
  }
  scene.inspection_boxes = boxes(n, "inspection_boxes");
  if (scene.inspection_boxes.empty()) fail(n, "scene.inspection_boxes is required and must not be empty");

  const YAML::Node pts = n["interest_points"];
  if (!pts) return;
  if (!pts.IsSequence()) fail(pts, "interest_points must be a list");
  std::set<int> ids;
  auto add = [&](const InterestPoint& p, const YAML::Node& where) {
    if (!ids.insert(p.id).second) fail(where, fmt::format("duplicate interest point id {}", p.id));
    scene.interest_points.push_back(p);
  };
  auto next_id = [&] { return ids.empty() ? 0 : *ids.rbegin() + 1; };

  for (const auto& e : pts) {
    if (e["scatter"]) {
      check_keys(e, {"scatter"}, "interest point entry");
      const YAML::Node s = e["scatter"];
      check_keys(s, {"shell", "solid", "box", "count", "per_face", "seed"}, "scatter");
      BoundingBox target;
      const int sources = (s["shell"] ? 1 : 0) + (s["solid"] ? 1 : 0) + (s["box"] ? 1 : 0);
      if (sources != 1) fail(s, "scatter needs exactly one of shell, solid or box");
      if (s["box"]) {
        target = box(s["box"], "scatter box");
      } else {
        const bool shell = static_cast<bool>(s["shell"]);
        const YAML::Node idx = shell ? s["shell"] : s["solid"];
        const auto i = scalar<int>(idx, "scatter index");
        const auto& pool = shell ? shells : scene.solids;
        if (i < 0 || static_cast<std::size_t>(i) >= pool.size()) fail(idx, fmt::format("scatter index {} out of range", i));
        target = pool[static_cast<std::size_t>(i)];
      }
      std::uint64_t seed = default_seed;
      read(s, "seed", seed);
      if (static_cast<bool>(s["count"]) == static_cast<bool>(s["per_face"])) fail(s, "scatter needs exactly one of count or per_face");
      std::vector<InterestPoint> made;
      if (s["count"]) {
        const auto c = scalar<int>(s["count"], "count");
        if (c < 0) fail(s["count"], "count must be non-negative");
        made = scatter_on_box(target, c, seed, next_id());
      } else {
        const auto c = scalar<int>(s["per_face"], "per_face");
        if (c < 0) fail(s["per_face"], "per_face must be non-negative");
        made = scatter_per_face(target, c, seed, next_id());
      }
      for (const auto& p : made) add(p, s);
    } else {
      check_keys(e, {"id", "position", "normal"}, "interest point");
      if (!e["position"] || !e["normal"]) fail(e, "interest point needs position and normal");
      InterestPoint p;
      p.id = e["id"] ? scalar<int>(e["id"], "id") : next_id();
      p.position = vec3(e["position"], "position");
      const Vec3 nrm = vec3(e["normal"], "normal");
      if (!(nrm.norm() > 0.0)) fail(e["normal"], "normal must be non-zero");
      // Already-unit normals are kept bit-exact so serialized files reparse identically.
      p.normal = std::abs(nrm.norm() - 1.0) < 1e-12 ? nrm : Vec3(nrm.normalized());
      add(p, e);
    }
  }
}

void validate_starts(const Scenario& s) {
  std::vector<Vec3> starts;
  for (const auto& a : s.config.roster) starts.push_back(a.start);
  const auto volume = compute_operational_volume(s.scene.inspection_boxes, starts, s.config.voxel_size);
  const VoxelGrid grid = build_grid(volume, s.config.voxel_size);
  const auto truth = ground_truth_occupancy(s.scene, grid);
  std::set<VoxelIndex> used;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const VoxelIndex v = grid.world_to_voxel(starts[i]);
    if (truth[grid.linear(v)]) throw ConfigError(fmt::format("agent {} starts inside an obstructed voxel", i));
    if (!used.insert(v).second) throw ConfigError(fmt::format("agent {} starts in a voxel already taken", i));
  }
}

}  // namespace

Scenario parse_scenario_string(const std::string& text, const ScenarioOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }
  if (!root || root.IsNull()) throw ConfigError("scenario is empty");

  Scenario s;
  try {
    check_keys(root, {"name", "mission", "camera", "lidar", "scene", "roster"}, "scenario");
    read(root, "name", s.name);
    if (const YAML::Node m = root["mission"]) read_mission(m, s.config);
    if (const YAML::Node c = root["camera"]) read_camera(c, s.config.camera);
    if (const YAML::Node l = root["lidar"]) read_lidar(l, s.config.lidar);

    if (overrides.seed) s.config.seed = *overrides.seed;
    if (overrides.duration) s.config.duration = *overrides.duration;
    if (overrides.voxel_size) s.config.voxel_size = *overrides.voxel_size;
    if (overrides.quality_floor) s.config.camera.quality_floor = *overrides.quality_floor;
    if (overrides.horizon) s.config.horizon = *overrides.horizon;

    const YAML::Node scene = root["scene"];
    if (!scene) fail(root, "scene block is required");
    read_scene(scene, s.config.seed, s.scene);

    const YAML::Node roster = root["roster"];
    if (!roster || !roster.IsSequence() || roster.size() == 0) fail(root, "roster must be a non-empty list");
    for (const auto& a : roster) s.config.roster.push_back(read_agent(a));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }

  s.config.validate();
  validate_starts(s);
  return s;
}

Scenario parse_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot open scenario '{}'", path));
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_scenario_string(ss.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

namespace {

// Shortest representation that parses back to the same double.
std::string num(double x) { return fmt::format("{}", x); }
// Degrees are printed at 15 digits so a value written by hand survives deg -> rad -> deg.
std::string deg(double radians) { return fmt::format("{:.15g}", rad2deg(radians)); }

void emit_vec(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq << num(v.x()) << num(v.y()) << num(v.z()) << YAML::EndSeq;
}

void emit_box(YAML::Emitter& out, const BoundingBox& b) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "min" << YAML::Value;
  emit_vec(out, b.min_corner);
  out << YAML::Key << "max" << YAML::Value;
  emit_vec(out, b.max_corner);
  out << YAML::EndMap;
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  const MissionConfig& c = s.config;
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (!s.name.empty()) out << YAML::Key << "name" << YAML::Value << s.name;

  out << YAML::Key << "mission" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "duration" << YAML::Value << num(c.duration);
  out << YAML::Key << "tick" << YAML::Value << num(c.tick);
  out << YAML::Key << "voxel_size" << YAML::Value << num(c.voxel_size);
  out << YAML::Key << "quality_floor" << YAML::Value << num(c.camera.quality_floor);
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "waypoint_standoff" << YAML::Value << num(c.waypoint_standoff);
  out << YAML::Key << "capture_speed" << YAML::Value << num(c.capture_speed);
  out << YAML::Key << "max_dwell" << YAML::Value << num(c.max_dwell);
  out << YAML::Key << "capture_stride" << YAML::Value << c.capture_stride;
  out << YAML::Key << "record_observations" << YAML::Value << c.record_observations;
  out << YAML::EndMap;

  const CameraConfig& cam = c.camera;
  out << YAML::Key << "camera" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "fov_h_deg" << YAML::Value << deg(cam.fov_h);
  out << YAML::Key << "fov_v_deg" << YAML::Value << deg(cam.fov_v);
  out << YAML::Key << "range" << YAML::Value << num(cam.range);
  out << YAML::Key << "focal" << YAML::Value << num(cam.focal);
  out << YAML::Key << "pixel_width" << YAML::Value << num(cam.pixel_width);
  out << YAML::Key << "exposure" << YAML::Value << num(cam.exposure);
  out << YAML::Key << "desired_resolution" << YAML::Value << num(cam.desired_resolution);
  out << YAML::EndMap;

  const LidarConfig& l = c.lidar;
  out << YAML::Key << "lidar" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "range" << YAML::Value << num(l.range);
  out << YAML::Key << "beams" << YAML::Value << l.beams;
  out << YAML::Key << "azimuth_steps" << YAML::Value << l.azimuth_steps;
  out << YAML::Key << "vertical_aperture_deg" << YAML::Value << deg(l.vertical_aperture);
  out << YAML::Key << "servo_period" << YAML::Value << num(l.servo_period);
  out << YAML::Key << "servo_min_deg" << YAML::Value << deg(l.servo_min);
  out << YAML::Key << "servo_max_deg" << YAML::Value << deg(l.servo_max);
  out << YAML::Key << "clear_on_miss" << YAML::Value << l.clear_on_miss;
  out << YAML::EndMap;

  out << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "solids" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : s.scene.solids) emit_box(out, b);
  out << YAML::EndSeq;
  out << YAML::Key << "triangles" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : s.scene.triangles) {
    out << YAML::Flow << YAML::BeginSeq;
    emit_vec(out, t.a);
    emit_vec(out, t.b);
    emit_vec(out, t.c);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "inspection_boxes" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : s.scene.inspection_boxes) emit_box(out, b);
  out << YAML::EndSeq;
  out << YAML::Key << "interest_points" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : s.scene.interest_points) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << p.id;
    out << YAML::Key << "position" << YAML::Value;
    emit_vec(out, p.position);
    out << YAML::Key << "normal" << YAML::Value;
    emit_vec(out, p.normal);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::Key << "roster" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : c.roster) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(a.kind);
    out << YAML::Key << "start" << YAML::Value;
    emit_vec(out, a.start);
    out << YAML::Key << "start_yaw_deg" << YAML::Value << deg(a.start_yaw);
    out << YAML::Key << "v_max" << YAML::Value << num(a.limits.v_max);
    out << YAML::Key << "a_max" << YAML::Value << num(a.limits.a_max);
    out << YAML::Key << "yaw_rate_max" << YAML::Value << num(a.limits.yaw_rate_max);
    out << YAML::Key << "yaw_accel_max" << YAML::Value << num(a.limits.yaw_accel_max);
    out << YAML::Key << "gimbal" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "inclination_min_deg" << YAML::Value << deg(a.gimbal.inclination_min);
    out << YAML::Key << "inclination_max_deg" << YAML::Value << deg(a.gimbal.inclination_max);
    out << YAML::Key << "azimuth_min_deg" << YAML::Value << deg(a.gimbal.azimuth_min);
    out << YAML::Key << "azimuth_max_deg" << YAML::Value << deg(a.gimbal.azimuth_max);
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace coinspect
