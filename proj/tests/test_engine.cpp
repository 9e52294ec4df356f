#include "coinspect/engine.hpp"
#include "support/missions.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

using namespace coinspect;
using namespace coinspect::testing;

namespace {

std::vector<InterestPoint> points(int n) {
  std::vector<InterestPoint> p;
  for (int i = 0; i < n; ++i) p.push_back({i, Vec3(i, 0, 0), Vec3::UnitX()});
  return p;
}

Observation obs(int point, double q, long k = 0, int agent = 0) {
  Observation o;
  o.point_id = point;
  o.q = q;
  o.q_blur = q;
  o.q_res = 1.0;
  o.timestep = k;
  o.agent_id = agent;
  return o;
}

const MissionResult& shared_run() {
  static const MissionResult r = [] {
    Rng rng(101);
    const MiniMission m = random_mini_mission(rng);
    return run_mission(m.cfg, m.scene);
  }();
  return r;
}

}  // namespace

TEST_CASE("ledger keeps the best quality above the floor") {
  const auto p = points(3);
  ScoreLedger l(p, 0.1);
  update_ledger(l, std::vector<Observation>{obs(0, 0.5)});
  update_ledger(l, std::vector<Observation>{obs(0, 0.3, 1)});
  CHECK(l.record(0).best_q == 0.5);
  CHECK(l.record(0).count == 2);

  update_ledger(l, std::vector<Observation>{obs(1, 0.5, 2, 0), obs(1, 0.8, 2, 1)});
  CHECK(l.record(1).best_q == 0.8);
  CHECK(l.record(1).best_agent == 1);

  update_ledger(l, std::vector<Observation>{obs(2, 0.1)});
  CHECK(l.record(2).best_q == 0.0);
  CHECK(l.record(2).count == 0);
  CHECK(l.observed_count() == 2);

  CHECK_THROWS_AS(update_ledger(l, std::vector<Observation>{obs(9, 0.5)}), RangeError);
  const std::vector<InterestPoint> dup{{1, Vec3::Zero(), Vec3::UnitX()}, {1, Vec3::Ones(), Vec3::UnitX()}};
  CHECK_THROWS_AS(ScoreLedger(dup, 0.1), ConfigError);
}

TEST_CASE("inspection score sums best qualities") {
  CHECK(inspection_score(ScoreLedger{}) == 0.0);
  const auto p = points(3);
  ScoreLedger l(p, 0.1);
  update_ledger(l, std::vector<Observation>{obs(0, 1.0), obs(1, 0.5)});
  CHECK(inspection_score(l) == 1.5);
  CHECK(l.average() == 0.5);
}

TEST_CASE("ledger score equals the brute-force log replay on random logs") {
  Rng rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(30));
    const auto p = points(n);
    const double floor = rng.uniform(0.0, 0.5);
    std::vector<Observation> log;
    const int rows = static_cast<int>(rng.below(400));
    for (int i = 0; i < rows; ++i) {
      // Include exact floor values so the strict gate is exercised.
      const double q = rng.below(10) == 0 ? floor : rng.uniform();
      log.push_back(obs(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))), q, i / 5,
                        static_cast<int>(rng.below(3))));
    }
    ScoreLedger l(p, floor);
    for (std::size_t i = 0; i < log.size(); i += 7) {
      update_ledger(l, std::span<const Observation>(log).subspan(i, std::min<std::size_t>(7, log.size() - i)));
    }
    CHECK(inspection_score(l) == brute_force_score(log, p, floor));
  }
}

TEST_CASE("average quality trace") {
  const auto p = points(4);
  const std::vector<Observation> log{obs(0, 0.4, 2), obs(1, 0.8, 2), obs(0, 0.2, 3), obs(3, 1.0, 5)};
  const auto tr = average_quality_trace(log, p, 0.1, 7);
  REQUIRE(tr.size() == 7);
  CHECK(tr[0] == 0.0);
  CHECK(tr[1] == 0.0);
  CHECK(tr[2] == doctest::Approx(0.3));
  CHECK(tr[3] == tr[2]);
  CHECK(tr[5] == doctest::Approx(0.55));
  CHECK(std::is_sorted(tr.begin(), tr.end()));
  ScoreLedger l(p, 0.1);
  l.update(log);
  CHECK(tr.back() == inspection_score(l) / 4.0);
}

TEST_CASE("heatmap concentrates on the face a hovering camera looks at") {
  const BoundingBox cube{Vec3(10, -5, -5), Vec3(20, 5, 5)};
  Scene s;
  s.solids.push_back(cube);
  s.interest_points = scatter_per_face(cube, 10, 9, 0);
  CameraConfig cfg;
  ScoreLedger l(s.interest_points, cfg.quality_floor);
  AgentState a;
  for (long k = 0; k < 20; ++k) l.update(observe(a, {}, s, cfg, k));
  for (const auto& h : intensity_heatmap(l, s)) {
    if (h.normal.isApprox(Vec3(-1, 0, 0))) {
      CHECK(h.count == 20);
    } else {
      CHECK(h.count == 0);
      CHECK(h.best_q == 0.0);
    }
  }
}

TEST_CASE("a mini mission satisfies the ledger, trace and safety invariants") {
  const MissionResult& r = shared_run();
  const auto& pts = r.ledger.point_ids();
  REQUIRE(r.ticks > 0);
  CHECK(r.score_trace.size() == static_cast<std::size_t>(r.ticks));
  CHECK(r.safety.total() == 0);
  CHECK(r.Q > 0.0);
  CHECK(r.Q <= static_cast<double>(pts.size()));

  for (std::size_t i = 1; i < r.score_trace.size(); ++i) {
    CHECK(r.score_trace[i].average_quality >= r.score_trace[i - 1].average_quality);
  }
  CHECK(r.score_trace.back().average_quality == r.Q / static_cast<double>(pts.size()));
  CHECK(r.Q == inspection_score(r.ledger));

  long above = 0;
  for (const auto& o : r.observations) {
    CHECK(o.q == o.q_blur * o.q_res);
    CHECK(o.q > 0.0);
    CHECK(o.q <= 1.0);
    above += o.q > r.ledger.quality_floor() ? 1 : 0;
  }
  long counted = 0;
  for (const auto& rec : r.ledger.records()) counted += rec.count;
  CHECK(counted == above);
}

TEST_CASE("mission Q equals the brute-force recomputation from its own log") {
  Rng rng(107);
  for (int trial = 0; trial < 3; ++trial) {
    const MiniMission m = random_mini_mission(rng);
    const MissionResult r = run_mission(m.cfg, m.scene);
    CHECK(r.Q == brute_force_score(r.observations, m.scene.interest_points, m.cfg.camera.quality_floor));
    CHECK(r.safety.total() == 0);
  }
}

TEST_CASE("a scene without interest points scores zero") {
  Rng rng(109);
  MiniMission m = random_mini_mission(rng);
  m.scene.interest_points.clear();
  m.cfg.duration = 10.0;
  const MissionResult r = run_mission(m.cfg, m.scene);
  CHECK(r.Q == 0.0);
  CHECK(r.observations.empty());
  CHECK(r.score_trace.back().average_quality == 0.0);
}

TEST_CASE("missions are deterministic") {
  Rng rng(113);
  const MiniMission m = random_mini_mission(rng);
  const MissionResult a = run_mission(m.cfg, m.scene);
  const MissionResult b = run_mission(m.cfg, m.scene);
  CHECK(result_digest(a, m.scene) == result_digest(b, m.scene));
  CHECK(render_observations(a) == render_observations(b));
  CHECK(a.Q == b.Q);
}

TEST_CASE("mission configuration is validated") {
  Rng rng(127);
  MiniMission m = random_mini_mission(rng);
  MissionConfig three = m.cfg;
  for (int i = 0; i < 3; ++i) {
    AgentConfig e;
    e.kind = AgentKind::Explorer;
    e.start = Vec3(-3, 3 + 6 * (5 + i), 9);
    three.roster.push_back(e);
  }
  CHECK_THROWS_WITH_AS(three.validate(), doctest::Contains("N_e ∈ {1,2}"), ConfigError);

  MissionConfig none = m.cfg;
  std::erase_if(none.roster, [](const AgentConfig& a) { return a.kind == AgentKind::Explorer; });
  CHECK_THROWS_AS(none.validate(), ConfigError);

  MissionConfig bad = m.cfg;
  bad.duration = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m.cfg;
  bad.camera.quality_floor = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  MissionConfig clash = m.cfg;
  clash.roster[1].start = clash.roster[0].start + Vec3(0.5, 0.5, 0.5);
  CHECK_THROWS_AS(run_mission(clash, m.scene), ConfigError);
  Scene solid = m.scene;
  solid.solids.push_back({Vec3(6, 6, 6), Vec3(12, 12, 12)});
  MissionConfig inside = m.cfg;
  inside.roster[0].start = Vec3(9, 9, 9);
  CHECK_THROWS_AS(run_mission(inside, solid), ConfigError);

  Scene no_boxes = m.scene;
  no_boxes.inspection_boxes.clear();
  CHECK_THROWS_AS(run_mission(m.cfg, no_boxes), ConfigError);
}

TEST_CASE("tick count covers the duration") {
  MissionConfig c;
  c.duration = 120.0;
  c.tick = 0.1;
  CHECK(c.tick_count() == 1200);
  c.duration = 0.25;
  CHECK(c.tick_count() == 3);
}

TEST_CASE("output files render with their headers") {
  const MissionResult& r = shared_run();
  Rng rng(101);
  const MiniMission m = random_mini_mission(rng);
  CHECK(render_score_trace(r).rfind("timestep,time,average_quality,Q\n", 0) == 0);
  CHECK(render_observations(r).rfind("timestep,agent,point_id,q_blur,q_res,q\n", 0) == 0);
  CHECK(render_heatmap(r, m.scene).rfind("point_id,x,y,z,nx,ny,nz,count,best_q\n", 0) == 0);
  CHECK(render_connectivity(r).rfind("timestep,edges\n", 0) == 0);
  CHECK(render_summary(r).find("\"Q\"") != std::string::npos);
  CHECK(render_plans(r).find("plan timestep=") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "coinspect_engine_outputs";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(r, m.scene, dir.string());
  for (const auto& f : files) CHECK(std::filesystem::exists(dir / f));
  CHECK(std::find(files.begin(), files.end(), "mission_result.json") != files.end());
  CHECK(result_digest(r, m.scene).size() == 16);
  std::filesystem::remove_all(dir);
}
