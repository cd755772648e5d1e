// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "ftnoc/error.hpp"
#include "ftnoc/health.hpp"
#include "ftnoc/routing.hpp"

using namespace ftnoc;

TEST_CASE("fresh shm is all healthy") {
  const auto ag = build_mesh(3, 2);
  const SystemHealthMap shm(ag);
  CHECK(shm.broken_count() == 0);
  CHECK(shm.turn_slot_count() == 8);
  CHECK(SystemHealthMap(build_mesh(2, 2, 2)).turn_slot_count() == 24);
  for (TileId t = 0; t < 6; ++t) CHECK(shm.pe_usable(t));
}

TEST_CASE("apply_fault is idempotent and rejects unknown targets") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  apply_fault(shm, PeFault{2});
  apply_fault(shm, PeFault{2});
  CHECK(shm.broken_count() == 1);
  CHECK(shm.is_broken(PeFault{2}));
  CHECK_FALSE(shm.pe_usable(2));
  CHECK_THROWS_AS(apply_fault(shm, PeFault{4}), UnknownTarget);
  CHECK_THROWS_AS(apply_fault(shm, LinkFault{8}), UnknownTarget);
  CHECK_THROWS_AS(apply_fault(shm, TurnFault{0, 8}), UnknownTarget);
}

TEST_CASE("aging") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  set_aging(shm, 1, 50);
  CHECK(shm.aging(1) == 50);
  CHECK(effective_wcet(10, 50) == 20);
  CHECK(effective_wcet(10, 0) == 10);
  CHECK(effective_wcet(10, 30) == 15);  // ceil(10 / 0.7)
  CHECK_FALSE(effective_wcet(10, 100).has_value());
  set_aging(shm, 1, 100);
  CHECK_FALSE(shm.pe_usable(1));
  CHECK_THROWS_AS(set_aging(shm, 1, 101), RangeError);
  CHECK_THROWS_AS(set_aging(shm, 1, -1), RangeError);
  CHECK_THROWS_AS(set_aging(shm, 9, 10), UnknownTarget);
}

TEST_CASE("snapshot/restore round trip and shape check") {
  const auto ag = build_mesh(3, 3);
  SystemHealthMap shm(ag);
  apply_fault(shm, LinkFault{3});
  const auto before = shm.serialize();
  const auto snap = snapshot(shm);
  apply_fault(shm, PeFault{4});
  apply_fault(shm, TurnFault{2, 5});
  set_aging(shm, 0, 10);
  CHECK(shm.serialize() != before);
  restore(shm, snap);
  CHECK(shm.serialize() == before);
  SystemHealthMap other(build_mesh(2, 2));
  CHECK_THROWS_AS(restore(other, snap), DimensionMismatch);
}

TEST_CASE("monotone degradation under random fault sequences") {
  std::mt19937_64 rng(1);
  const auto ag = build_mesh(4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    SystemHealthMap shm(ag);
    std::vector<Fault> applied;
    for (int i = 0; i < 10; ++i) {
      Fault f;
      switch (rng() % 3) {
        case 0: f = PeFault{static_cast<TileId>(rng() % 16)}; break;
        case 1: f = LinkFault{static_cast<LinkId>(rng() % ag.link_count())}; break;
        default: f = TurnFault{static_cast<TileId>(rng() % 16), static_cast<int>(rng() % 8)};
      }
      const auto count = shm.broken_count();
      apply_fault(shm, f);
      applied.push_back(f);
      CHECK(shm.broken_count() >= count);
      for (const auto& g : applied) CHECK(shm.is_broken(g));
    }
  }
}

TEST_CASE("lbdr of corner (0,0) on 2x2 XY") {
  const auto ag = build_mesh(2, 2);
  SystemHealthMap shm(ag);
  const auto c = derive_lbdr_config(shm, ag, TurnModel::xy(), 0);
  CHECK(c.cn);
  CHECK(c.ce);
  CHECK_FALSE(c.cw);
  CHECK_FALSE(c.cs);
  CHECK(c.ren);
  CHECK(c.res);
  CHECK(c.rwn);
  CHECK(c.rws);
  CHECK_FALSE(c.rne);
  CHECK_FALSE(c.rnw);
  CHECK_FALSE(c.rse);
  CHECK_FALSE(c.rsw);
  CHECK(c.to_string() == "1100|00111100");

  apply_fault(shm, TurnFault{0, *turn_slot(Direction::E, Direction::N, false)});
  const auto d = derive_lbdr_config(shm, ag, TurnModel::xy(), 0);
  CHECK_FALSE(d.ren);
  CHECK(d.res);

  apply_fault(shm, LinkFault{*ag.out_link(0, Direction::N)});
  CHECK_FALSE(derive_lbdr_config(shm, ag, TurnModel::xy(), 0).cn);

  CHECK_THROWS_AS(derive_lbdr_config(shm, ag, TurnModel::xy(), 7), UnknownTile);
  const auto ag3 = build_mesh(2, 2, 2);
  CHECK_THROWS_AS(derive_lbdr_config(SystemHealthMap(ag3), ag3, TurnModel::xyz(), 0), DimensionMismatch);
}

TEST_CASE("fault descriptions") {
  CHECK(describe(Fault{PeFault{3}}) == "pe(3)");
  CHECK(describe(Fault{LinkFault{7}}) == "link(7)");
  CHECK(describe(Fault{TurnFault{1, 6}}).find("turn") == 0);
}
