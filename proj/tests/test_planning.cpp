#include "coinspect/planning.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace coinspect;
using namespace coinspect::testing;

namespace {

OccupancyMap all_free(const VoxelGrid& g) {
  OccupancyMap m(g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) m.mark_free(i);
  return m;
}

Waypoint at(const VoxelGrid& g, const VoxelIndex& v) {
  Waypoint w;
  w.voxel = v;
  w.position = g.voxel_to_world(v);
  return w;
}

Waypoint point(const Vec3& p) {
  Waypoint w;
  w.position = p;
  return w;
}

}  // namespace

TEST_CASE("mapping paths split the cross-section into bands") {
  const OperationalVolume vol{Vec3(0, 0, 0), Vec3(140, 60, 60)};
  const std::vector<Vec3> starts{{0, 10, 30}, {0, 50, 30}};
  const auto paths = mapping_paths(vol, starts, 2);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0][0].isApprox(Vec3(0, 15, 30)));
  CHECK(paths[0][1].isApprox(Vec3(140, 15, 30)));
  CHECK(paths[0][2] == paths[0][0]);
  CHECK(paths[1][0].isApprox(Vec3(0, 45, 30)));
  CHECK(paths[1][1].isApprox(Vec3(140, 45, 30)));

  const auto one = mapping_paths(vol, starts, 1, 3.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0][0].isApprox(Vec3(3, 30, 30)));
  CHECK(one[0][1].isApprox(Vec3(137, 30, 30)));

  // Starting near the far end makes that end the near one.
  const std::vector<Vec3> far{{140, 30, 30}};
  CHECK(mapping_paths(vol, far, 1)[0][0].x() == 140.0);

  const OperationalVolume tall{Vec3(0, 0, 0), Vec3(20, 30, 100)};
  const auto vert = mapping_paths(tall, starts, 1);
  CHECK(vert[0][0].isApprox(Vec3(10, 15, 0)));
  CHECK(vert[0][1].isApprox(Vec3(10, 15, 100)));

  CHECK_THROWS_AS(mapping_paths(vol, starts, 0), ConfigError);
  CHECK_THROWS_AS(mapping_paths(vol, std::vector<Vec3>{{0, 0, 0}}, 2), ConfigError);
}

TEST_CASE("waypoints around a single occupied voxel") {
  const VoxelGrid g = cube_grid(3, 6.0);
  OccupancyMap m = all_free(g);
  m.mark_occupied(VoxelIndex{1, 1, 1});
  const std::vector<BoundingBox> box{{Vec3(0, 0, 0), Vec3(18, 18, 18)}};
  const auto w = generate_waypoints(m, box, {6.0});
  REQUIRE(w.size() == 6);
  for (const auto& p : w) {
    CHECK(p.source_voxel == VoxelIndex{1, 1, 1});
    CHECK(p.direction.norm() == 1.0);
    CHECK(p.direction.isApprox((g.voxel_to_world({1, 1, 1}) - p.position).normalized()));
    CHECK(m.at(p.voxel) == CellState::Free);
  }
  const std::vector<BoundingBox> away{{Vec3(100, 100, 100), Vec3(110, 110, 110)}};
  CHECK(generate_waypoints(m, away).empty());
}

TEST_CASE("a two-voxel slab yields ten waypoints") {
  const VoxelGrid g = cube_grid(4, 6.0);
  OccupancyMap m = all_free(g);
  m.mark_occupied(VoxelIndex{1, 1, 1});
  m.mark_occupied(VoxelIndex{2, 1, 1});
  const std::vector<BoundingBox> box{{Vec3(0, 0, 0), Vec3(24, 24, 24)}};
  const auto w = generate_waypoints(m, box);
  CHECK(w.size() == 10);
  // Brute force: free face-neighbours of occupied voxels inside the box.
  std::size_t faces = 0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (m.at(i) != CellState::Occupied) continue;
    for (const auto& s : kFaceSteps) {
      const VoxelIndex n = g.from_linear(i) + s;
      faces += g.in_bounds(n) && m.at(n) == CellState::Free ? 1 : 0;
    }
  }
  CHECK(faces == w.size());
}

TEST_CASE("waypoint standoff walks back when the far voxel is not free") {
  const VoxelGrid g(Vec3::Zero(), {6, 1, 1}, 6.0);
  OccupancyMap m = all_free(g);
  m.mark_occupied(VoxelIndex{0, 0, 0});
  const std::vector<BoundingBox> box{{Vec3(0, 0, 0), Vec3(36, 6, 6)}};
  auto w = generate_waypoints(m, box, {18.0});
  REQUIRE(w.size() == 1);
  CHECK(w[0].voxel == VoxelIndex{3, 0, 0});
  m.mark_occupied(VoxelIndex{3, 0, 0});
  w = generate_waypoints(m, box, {18.0});
  // Each side settles on the farthest voxel whose whole line is free.
  auto from = [&](const VoxelIndex& src, const VoxelIndex& dst) {
    return std::count_if(w.begin(), w.end(), [&](const Waypoint& p) { return p.source_voxel == src && p.voxel == dst; });
  };
  CHECK(w.size() == 3);
  CHECK(from({0, 0, 0}, {2, 0, 0}) == 1);
  CHECK(from({3, 0, 0}, {1, 0, 0}) == 1);
  CHECK(from({3, 0, 0}, {5, 0, 0}) == 1);
}

TEST_CASE("waypoint directions always point at an occupied voxel through a face") {
  Rng rng(71);
  const VoxelGrid g = cube_grid(7, 6.0);
  const std::vector<BoundingBox> box{{Vec3(0, 0, 0), Vec3(42, 42, 42)}};
  for (int trial = 0; trial < 30; ++trial) {
    const OccupancyMap m = random_map(rng, g, 0.15, 0.6);
    const auto w = generate_waypoints(m, box, {rng.uniform(0.0, 20.0)});
    for (const auto& p : w) {
      CHECK(m.at(p.voxel) == CellState::Free);
      CHECK(m.at(p.source_voxel) == CellState::Occupied);
      CHECK(p.direction.cwiseAbs().sum() == 1.0);
      const Vec3 d = g.voxel_to_world(p.source_voxel) - p.position;
      CHECK((d.normalized() - p.direction).norm() < 1e-12);
    }
  }
}

TEST_CASE("mTSP hand-traced example") {
  const std::vector<Waypoint> w{point({1, 0, 0}), point({9, 0, 0}), point({2, 0, 0})};
  const std::vector<AgentPosition> agents{{1, Vec3(0, 0, 0)}, {2, Vec3(10, 0, 0)}};
  const auto paths = mtsp_assign(w, agents);
  REQUIRE(paths.at(1).waypoints.size() == 2);
  CHECK(paths.at(1).waypoints[0].position == Vec3(1, 0, 0));
  CHECK(paths.at(1).waypoints[1].position == Vec3(2, 0, 0));
  REQUIRE(paths.at(2).waypoints.size() == 1);
  CHECK(paths.at(2).waypoints[0].position == Vec3(9, 0, 0));
}

TEST_CASE("mTSP degenerate cases") {
  const std::vector<Waypoint> w{point({5, 0, 0}), point({1, 0, 0}), point({3, 0, 0})};
  const std::vector<AgentPosition> one{{0, Vec3::Zero()}};
  const auto tour = mtsp_assign(w, one).at(0).waypoints;
  REQUIRE(tour.size() == 3);
  CHECK(tour[0].position.x() == 1.0);
  CHECK(tour[1].position.x() == 3.0);
  CHECK(tour[2].position.x() == 5.0);

  const std::vector<AgentPosition> two{{3, Vec3::Zero()}, {1, Vec3::Zero()}};
  const auto empty = mtsp_assign(std::vector<Waypoint>{}, two);
  CHECK(empty.size() == 2);
  CHECK(empty.at(1).waypoints.empty());
  CHECK(empty.at(3).waypoints.empty());
  CHECK_THROWS_AS(mtsp_assign(w, std::vector<AgentPosition>{}), PlanningError);

  // Equidistant waypoints go to the lowest index.
  const std::vector<Waypoint> tie{point({-1, 0, 0}), point({1, 0, 0})};
  CHECK(mtsp_assign(tie, one).at(0).waypoints[0].position.x() == -1.0);
}

TEST_CASE("mTSP output is an exact partition built by greedy round robin") {
  Rng rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_mtsp_instance(rng);
    const auto paths = mtsp_assign(inst.waypoints, inst.agents);
    CHECK(check_mtsp(inst, paths));
  }
}

TEST_CASE("dijkstra examples") {
  const VoxelGrid line(Vec3::Zero(), {3, 1, 1}, 6.0);
  OccupancyMap m = all_free(line);
  NavGraph gr = build_graph(line, m);
  const auto p = dijkstra_path(gr, m, {}, {0, 0, 0}, {2, 0, 0});
  CHECK(p == std::vector<VoxelIndex>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  CHECK((p.size() - 1) * gr.edge_weight() == 12.0);
  CHECK(dijkstra_path(gr, m, {}, {1, 0, 0}, {1, 0, 0}) == std::vector<VoxelIndex>{{1, 0, 0}});

  const VoxelGrid sq(Vec3::Zero(), {3, 3, 1}, 1.0);
  OccupancyMap ms = all_free(sq);
  ms.mark_occupied(VoxelIndex{1, 1, 0});
  gr = build_graph(sq, ms);
  const auto detour = dijkstra_path(gr, ms, {}, {0, 1, 0}, {2, 1, 0});
  CHECK(detour.size() == 5);
  // Lexicographic tie-break takes the low-y side.
  CHECK(detour[1] == VoxelIndex{0, 0, 0});

  const std::set<VoxelIndex> reserved{{1, 0, 0}};
  const auto around = dijkstra_path(gr, ms, reserved, {0, 1, 0}, {2, 1, 0});
  CHECK(around.size() == 5);
  CHECK(around[1] == VoxelIndex{0, 2, 0});
  CHECK(dijkstra_path(gr, ms, {{1, 0, 0}, {1, 2, 0}}, {0, 1, 0}, {2, 1, 0}).empty());
  CHECK_THROWS_AS(dijkstra_path(gr, ms, {}, {1, 1, 0}, {2, 1, 0}), PlanningError);
}

TEST_CASE("unknown cells block only under the blocked policy") {
  const VoxelGrid g(Vec3::Zero(), {3, 1, 1}, 1.0);
  OccupancyMap m(g);
  m.mark_free(VoxelIndex{0, 0, 0});
  m.mark_free(VoxelIndex{2, 0, 0});
  const NavGraph gr = build_graph(g, m);
  CHECK(dijkstra_path(gr, m, {}, {0, 0, 0}, {2, 0, 0}).size() == 3);
  CHECK(dijkstra_path(gr, m, {}, {0, 0, 0}, {2, 0, 0}, UnknownPolicy::Blocked).empty());
}

TEST_CASE("dijkstra agrees with a BFS oracle on random grids") {
  Rng rng(79);
  const VoxelGrid g = cube_grid(8, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const OccupancyMap m = random_map(rng, g, 0.2, 0.0);
    const NavGraph gr = build_graph(g, m);
    VoxelIndex s = random_voxel(rng, g), t = random_voxel(rng, g);
    while (m.at(s) == CellState::Occupied) s = random_voxel(rng, g);
    while (m.at(t) == CellState::Occupied) t = random_voxel(rng, g);
    const auto path = dijkstra_path(gr, m, {}, s, t);
    const int hops = bfs_hops(m, s, t);
    CHECK(path_is_valid(m, path, s, t) == (hops >= 0));
    if (hops < 0) {
      CHECK(path.empty());
    } else {
      CHECK(static_cast<double>(path.size() - 1) * gr.edge_weight() == hops * g.voxel_size());
    }
  }
}

TEST_CASE("receding horizon on a corridor executes three voxels at a time") {
  const VoxelGrid g(Vec3::Zero(), {10, 1, 1}, 1.0);
  const OccupancyMap m = all_free(g);
  const NavGraph gr = build_graph(g, m);
  PathProgress prog;
  prog.path.waypoints.push_back(at(g, {9, 0, 0}));
  VoxelIndex here{0, 0, 0};
  LocalPlan p = drhlp_step(here, prog, gr, m, {}, 3);
  CHECK(p.voxels == std::vector<VoxelIndex>{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  CHECK_FALSE(p.reached);
  here = p.voxels.back();
  p = drhlp_step(here, prog, gr, m, {}, 3);
  CHECK(p.voxels.front() == VoxelIndex{4, 0, 0});
  CHECK(p.voxels.size() == 3);
  here = p.voxels.back();
  p = drhlp_step(here, prog, gr, m, {}, 3);
  CHECK(p.voxels.size() == 3);
  CHECK(p.voxels.back() == VoxelIndex{9, 0, 0});
  p = drhlp_step(p.voxels.back(), prog, gr, m, {}, 3);
  CHECK(p.reached);
  CHECK(p.epoch_complete);
  CHECK(prog.visited == std::vector<std::size_t>{0});
}

TEST_CASE("adjacent single waypoint: one-voxel plan then epoch completion") {
  const VoxelGrid g(Vec3::Zero(), {3, 1, 1}, 1.0);
  const OccupancyMap m = all_free(g);
  const NavGraph gr = build_graph(g, m);
  PathProgress prog;
  prog.path.waypoints.push_back(at(g, {1, 0, 0}));
  LocalPlan p = drhlp_step({0, 0, 0}, prog, gr, m, {}, 3);
  CHECK(p.voxels.size() == 1);
  CHECK_FALSE(p.epoch_complete);
  p = drhlp_step({1, 0, 0}, prog, gr, m, {}, 3);
  CHECK(p.reached);
  CHECK(p.epoch_complete);
  CHECK(prog.exhausted());
}

TEST_CASE("replanning routes around a blockage that appears mid-path") {
  const VoxelGrid g(Vec3::Zero(), {6, 3, 1}, 1.0);
  OccupancyMap m = all_free(g);
  PathProgress prog;
  prog.path.waypoints.push_back(at(g, {5, 1, 0}));
  LocalPlan p = drhlp_step({0, 1, 0}, prog, build_graph(g, m), m, {}, 2);
  CHECK(p.voxels == std::vector<VoxelIndex>{{1, 1, 0}, {2, 1, 0}});
  m.mark_occupied(VoxelIndex{3, 1, 0});
  p = drhlp_step({2, 1, 0}, prog, build_graph(g, m), m, {}, 2);
  REQUIRE(p.voxels.size() == 2);
  CHECK(p.voxels[0].y != 1);
  CHECK(std::find(p.voxels.begin(), p.voxels.end(), VoxelIndex{3, 1, 0}) == p.voxels.end());
}

TEST_CASE("unreachable waypoints are skipped in order") {
  const VoxelGrid g(Vec3::Zero(), {5, 1, 1}, 1.0);
  OccupancyMap m = all_free(g);
  m.mark_occupied(VoxelIndex{3, 0, 0});
  const NavGraph gr = build_graph(g, m);
  PathProgress prog;
  prog.path.waypoints = {at(g, {4, 0, 0}), at(g, {2, 0, 0})};
  LocalPlan p = drhlp_step({0, 0, 0}, prog, gr, m, {}, 3);
  REQUIRE(p.skipped.size() == 1);
  CHECK(p.skipped[0].voxel == VoxelIndex{4, 0, 0});
  CHECK(p.receding->voxel == VoxelIndex{2, 0, 0});
  CHECK(prog.skipped == std::vector<std::size_t>{0});

  PathProgress lost;
  lost.path.waypoints = {at(g, {4, 0, 0})};
  p = drhlp_step({0, 0, 0}, lost, gr, m, {}, 3);
  CHECK(p.epoch_complete);
  CHECK(p.voxels.empty());
}
