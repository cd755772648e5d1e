// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "ftnoc/error.hpp"
#include "ftnoc/routing.hpp"
#include "oracle.hpp"

using namespace ftnoc;

namespace {

const std::vector<std::string> kAcyclicModels{"xy", "west-first", "north-last", "negative-first"};

TurnModel model_named(const std::string& n) { return *TurnModel::by_name(n); }

// Breaks a few random links and turns.
void random_faults(SystemHealthMap& shm, const ArchitectureGraph& ag, std::mt19937_64& rng, int n) {
  for (int i = 0; i < n; ++i) {
    if (rng() % 2 == 0) {
      apply_fault(shm, LinkFault{static_cast<LinkId>(rng() % ag.link_count())});
    } else {
      apply_fault(shm, TurnFault{static_cast<TileId>(rng() % ag.tile_count()), static_cast<int>(rng() % 8)});
    }
  }
}

std::vector<TileId> tiles_of(const Path& p) {
  std::vector<TileId> t;
  for (const auto& n : p)
    if (t.empty() || t.back() != n.tile) t.push_back(n.tile);
  return t;
}

}  // namespace

TEST_CASE("turn slot layout") {
  const auto s = turn_slots(false);
  REQUIRE(s.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(oracle::slot2d(s[static_cast<std::size_t>(i)].in, s[static_cast<std::size_t>(i)].out) == i);
  CHECK(turn_slots(true).size() == 24);
  for (const auto& name : kAcyclicModels)
    for (int i = 0; i < 8; ++i)
      CHECK(model_named(name).allows_slot(i) ==
            oracle::model_allows(name, s[static_cast<std::size_t>(i)].in, s[static_cast<std::size_t>(i)].out));
  CHECK_THROWS_AS(TurnModel::from_turns("bad", {{Direction::E, Direction::W}}), ConfigError);
  CHECK(TurnModel::from_turns("x", {{Direction::E, Direction::N}, {Direction::E, Direction::S},
                                    {Direction::W, Direction::N}, {Direction::W, Direction::S}}) == TurnModel::xy());
}

TEST_CASE("2x2 XY routing graph sizes") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  const auto rg = build_routing_graph(ag, TurnModel::xy(), shm);
  CHECK(rg.node_count() == 40);
  CHECK(rg.external_edge_count() == 8);
  apply_fault(shm, LinkFault{*ag.find_link(0, 1)});
  CHECK(build_routing_graph(ag, TurnModel::xy(), shm).external_edge_count() == 7);
  CHECK(build_routing_graph(build_mesh(2, 2, 2), TurnModel::xyz(), SystemHealthMap(build_mesh(2, 2, 2))).node_count() == 8 * 14);
}

TEST_CASE("rg rejects foreign shm") {
  const auto a = build_mesh(2, 2), b = build_mesh(3, 3);
  CHECK_THROWS_AS(build_routing_graph(a, TurnModel::xy(), SystemHealthMap(b)), DimensionMismatch);
}

TEST_CASE("rg edges stay within their kinds") {
  const auto ag = build_mesh(3, 3);
  SystemHealthMap shm(ag);
  const auto rg = build_routing_graph(ag, TurnModel::fully_adaptive(), shm);
  for (const auto& [a, b] : rg.edges()) {
    const auto na = rg.node(a), nb = rg.node(b);
    if (na.tile == nb.tile) {
      CHECK(na.kind == PortKind::In);
      CHECK(nb.kind == PortKind::Out);
    } else {
      CHECK(na.kind == PortKind::Out);
      CHECK(nb.kind == PortKind::In);
      const auto l = rg.link_of(a);
      REQUIRE(l.has_value());
      CHECK(ag.link(*l).src == na.tile);
      CHECK(ag.link(*l).dst == nb.tile);
    }
  }
}

TEST_CASE("deadlock freedom of named models") {
  for (int n = 1; n <= 4; ++n)
    for (const auto& name : kAcyclicModels) {
      const auto ag = build_mesh(n, n);
      SystemHealthMap shm(ag);
      CHECK(is_deadlock_free(build_routing_graph(ag, model_named(name), shm)));
    }
  const auto ag1 = build_mesh(1, 1);
  CHECK(is_deadlock_free(build_routing_graph(ag1, TurnModel::fully_adaptive(), SystemHealthMap(ag1))));
  const auto ag2 = build_mesh(2, 2);
  SystemHealthMap shm2(ag2);
  CHECK_FALSE(is_deadlock_free(build_routing_graph(ag2, TurnModel::fully_adaptive(), shm2)));
  CHECK(oracle::Net(ag2, shm2, "fully-adaptive").has_cycle());
  const auto ag3 = build_mesh(3, 3, 3);
  CHECK(is_deadlock_free(build_routing_graph(ag3, TurnModel::xyz(), SystemHealthMap(ag3))));
}

TEST_CASE("find_paths on 2x2 XY") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  const auto rg = build_routing_graph(ag, TurnModel::xy(), shm);
  const auto paths = find_paths(rg, 0, 3, 10);
  REQUIRE(paths.size() == 1);
  CHECK(tiles_of(paths[0]) == std::vector<TileId>{0, 1, 3});
  CHECK(find_paths(rg, 2, 2, 10).size() == 1);

  apply_fault(shm, LinkFault{*ag.find_link(0, 1)});
  CHECK(find_paths(build_routing_graph(ag, TurnModel::xy(), shm), 0, 3, 10).empty());
}

TEST_CASE("turn fault at (1,0) W-in->N-out cuts (0,0)->(1,1)") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  apply_fault(shm, TurnFault{1, *turn_slot(Direction::W, Direction::N, false)});
  const auto rg = build_routing_graph(ag, TurnModel::xy(), shm);
  CHECK(find_paths(rg, 0, 3, 10).empty());
  CHECK_FALSE(reachability_matrix(rg)[0][3]);
  CHECK(reachability_matrix(rg)[0][1]);
}

TEST_CASE("reachability matrix with the east link of (0,0) broken") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  apply_fault(shm, LinkFault{*ag.find_link(0, 1)});
  const auto m = reachability_matrix(build_routing_graph(ag, TurnModel::xy(), shm));
  for (TileId s = 0; s < 4; ++s)
    for (TileId d = 0; d < 4; ++d) CHECK(m[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)] == !(s == 0 && (d == 1 || d == 3)));
}

TEST_CASE("rg agrees with the packet-state oracle under random faults") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 2 + trial % 3, h = 2 + (trial / 3) % 3;
    const auto ag = build_mesh(w, h);
    SystemHealthMap shm(ag);
    random_faults(shm, ag, rng, 1 + trial % 4);
    if (trial % 7 == 0) apply_fault(shm, PeFault{static_cast<TileId>(rng() % ag.tile_count())});
    const std::string& name = kAcyclicModels[static_cast<std::size_t>(trial) % kAcyclicModels.size()];
    const auto rg = build_routing_graph(ag, model_named(name), shm);
    const oracle::Net net(ag, shm, name);
    CHECK(is_deadlock_free(rg) == !net.has_cycle());
    const auto m = reachability_matrix(rg);
    for (TileId s = 0; s < ag.dims().tile_count(); ++s) {
      const auto r = net.reach_from_source(s);
      for (TileId d = 0; d < ag.dims().tile_count(); ++d) {
        CHECK(m[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)] == r.contains(d));
        CHECK(find_paths(rg, s, d, 1000).size() == net.count_paths(s, d));
      }
    }
  }
}

TEST_CASE("find_paths order and limit") {
  const auto ag = build_mesh(3, 3);
  SystemHealthMap shm(ag);
  const auto rg = build_routing_graph(ag, TurnModel::west_first(), shm);
  const auto all = find_paths(rg, 0, 8, 100);
  // Six staircase paths plus west-free detours through the south.
  CHECK(all.size() == oracle::Net(ag, shm, "west-first").count_paths(0, 8));
  CHECK(all.size() > 6);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(tiles_of(all[i - 1]) < tiles_of(all[i]));
  CHECK(find_paths(rg, 0, 8, 2).size() == 2);
}

TEST_CASE("route finder picks shortest paths inside the rg") {
  const auto ag = build_mesh(4, 4);
  SystemHealthMap shm(ag);
  apply_fault(shm, LinkFault{*ag.find_link(5, 6)});
  auto rg = std::make_shared<const RoutingGraph>(build_routing_graph(ag, TurnModel::west_first(), shm));
  for (auto choice : {RouteChoice::FirstShortest, RouteChoice::RandomShortest}) {
    const RouteFinder rf(rg, {choice, 11});
    for (TileId s = 0; s < 16; ++s)
      for (TileId d = 0; d < 16; ++d) {
        const auto r = rf.route(s, d, static_cast<std::uint64_t>(s * 16 + d));
        CHECK(r.has_value() == rf.reachable(s, d));
        if (!r) continue;
        CHECK(is_path_in(*rg, r->nodes));
        CHECK(r->nodes.front() == rg->local_in(s));
        CHECK(r->nodes.back() == rg->local_out(d));
        // Repeat queries agree.
        CHECK(rf.route(s, d, static_cast<std::uint64_t>(s * 16 + d)) == r);
        // Shortest: no RG path with fewer links.
        const auto paths = find_paths(*rg, s, d, 1000);
        std::size_t best = 1000;
        for (const auto& p : paths) best = std::min(best, p.size());
        CHECK(r->nodes.size() == best);
      }
  }
}

TEST_CASE("random-shortest spreads over equivalent routes") {
  const auto ag = build_mesh(4, 4);
  auto rg = std::make_shared<const RoutingGraph>(build_routing_graph(ag, TurnModel::west_first(), SystemHealthMap(ag)));
  const RouteFinder rf(rg, {RouteChoice::RandomShortest, 3});
  std::set<std::vector<int>> seen;
  for (std::uint64_t k = 0; k < 64; ++k) seen.insert(rf.route(0, 15, k)->nodes);
  CHECK(seen.size() > 1);
}
