#include "coinspect/comms.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <algorithm>

using namespace coinspect;
using namespace coinspect::testing;

namespace {

NeighborSet chain(int n) {
  NeighborSet s;
  s.neighbors.resize(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) {
    s.neighbors[i].push_back(i + 1);
    s.neighbors[i + 1].push_back(i);
  }
  for (auto& v : s.neighbors) std::sort(v.begin(), v.end());
  return s;
}

bool all_equal(const std::vector<OccupancyMap>& maps) {
  return std::all_of(maps.begin(), maps.end(), [&](const OccupancyMap& m) { return m == maps.front(); });
}

// Every cell of `big` is at least as informed as in `small`.
bool dominates(const OccupancyMap& big, const OccupancyMap& small) {
  for (std::size_t i = 0; i < big.cells().size(); ++i) {
    if (big.at(i) < small.at(i)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("neighbors in an empty scene form a complete graph") {
  const std::vector<Vec3> p{{0, 0, 0}, {5, 0, 0}, {0, 7, 3}};
  const NeighborSet n = discover_neighbors(p, Scene{});
  CHECK(n.neighbors[0] == std::vector<int>{1, 2});
  CHECK(n.neighbors[1] == std::vector<int>{0, 2});
  CHECK(n.neighbors[2] == std::vector<int>{0, 1});
  CHECK(n.edges() == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("a wall splits the neighbor graph") {
  Scene s;
  s.solids.push_back({Vec3(5, -100, -100), Vec3(6, 100, 100)});
  const std::vector<Vec3> p{{0, 0, 0}, {10, 0, 0}, {10, 5, 0}};
  const NeighborSet n = discover_neighbors(p, s);
  CHECK(n.neighbors[0].empty());
  CHECK(n.neighbors[1] == std::vector<int>{2});
  CHECK(n.neighbors[2] == std::vector<int>{1});
  CHECK_FALSE(n.linked(0, 1));
  CHECK(n.linked(2, 1));
}

TEST_CASE("neighbor sets are symmetric and irreflexive") {
  Rng rng(53);
  Scene s;
  for (int i = 0; i < 8; ++i) {
    const Vec3 c = random_vec(rng, -20, 20);
    s.solids.push_back({c - Vec3(2, 6, 3), c + Vec3(2, 6, 3)});
  }
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Vec3> p;
    const int n = 2 + static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i) p.push_back(random_vec(rng, -25, 25));
    const NeighborSet ns = discover_neighbors(p, s);
    for (int i = 0; i < n; ++i) {
      CHECK_FALSE(ns.linked(i, i));
      for (int j = 0; j < n; ++j) REQUIRE(ns.linked(i, j) == ns.linked(j, i));
    }
  }
}

TEST_CASE("restricting a neighbor set drops every link of inactive slots") {
  const NeighborSet full = discover_neighbors(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}, Scene{});
  const bool active[] = {true, false, true, true};
  const NeighborSet r = full.restricted(active);
  CHECK(r.neighbors[1].empty());
  CHECK(r.neighbors[0] == std::vector<int>{2, 3});
  CHECK(r.edges() == std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {2, 3}});
}

TEST_CASE("single-round gossip on a three-agent chain") {
  const VoxelGrid g = cube_grid(2);
  std::vector<OccupancyMap> m(3, OccupancyMap(g));
  m[0].mark_free(VoxelIndex{0, 0, 0});
  m[1].mark_occupied(VoxelIndex{1, 0, 0});
  m[2].mark_free(VoxelIndex{0, 1, 1});
  const auto out = exchange_and_merge(chain(3), m);
  const OccupancyMap abc = merge_maps(merge_maps(m[0], m[1]), m[2]);
  CHECK(out[1] == abc);
  CHECK(out[0] == merge_maps(m[0], m[1]));
  CHECK(out[2] == merge_maps(m[1], m[2]));
}

TEST_CASE("full connectivity makes every map identical") {
  Rng rng(59);
  const VoxelGrid g = cube_grid(4);
  std::vector<OccupancyMap> m;
  for (int i = 0; i < 5; ++i) m.push_back(random_map(rng, g, 0.1, 0.3));
  const auto out = exchange_and_merge(discover_neighbors(std::vector<Vec3>(5, Vec3::Zero()), Scene{}), m);
  CHECK(all_equal(out));
}

TEST_CASE("maps do not cross a cut") {
  Rng rng(61);
  const VoxelGrid g = cube_grid(4);
  std::vector<OccupancyMap> m{random_map(rng, g, 0.2, 0.2), random_map(rng, g, 0.2, 0.2)};
  NeighborSet none;
  none.neighbors.resize(2);
  const auto out = exchange_and_merge(none, m);
  CHECK(out[0] == m[0]);
  CHECK(out[1] == m[1]);
}

TEST_CASE("chain gossip converges within the diameter and never loses knowledge") {
  Rng rng(67);
  const VoxelGrid g = cube_grid(5);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<OccupancyMap> maps;
      for (int i = 0; i < n; ++i) maps.push_back(random_map(rng, g, 0.05, 0.2));
      // Give the chain ends private occupied cells so convergence cannot come early.
      maps.front().mark_occupied(std::size_t{0});
      maps.back().mark_occupied(g.cell_count() - 1);
      const NeighborSet c = chain(n);
      const int diameter = n - 1;
      for (int round = 1; round <= diameter; ++round) {
        const auto next = exchange_and_merge(c, maps);
        for (int i = 0; i < n; ++i) REQUIRE(dominates(next[i], maps[i]));
        maps = next;
        CHECK(all_equal(maps) == (round == diameter));
      }
      const auto again = exchange_and_merge(c, maps);
      CHECK(again == maps);
    }
  }
}

TEST_CASE("gossip rejects mismatched inputs") {
  const VoxelGrid g = cube_grid(2);
  std::vector<OccupancyMap> m(2, OccupancyMap(g));
  CHECK_THROWS_AS(exchange_and_merge(chain(3), m), ConfigError);
  std::vector<OccupancyMap> mixed{OccupancyMap(g), OccupancyMap(cube_grid(3))};
  CHECK_THROWS_AS(exchange_and_merge(chain(2), mixed), ConfigError);
}
