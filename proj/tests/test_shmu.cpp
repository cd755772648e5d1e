// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "ftnoc/shmu.hpp"
#include "support.hpp"

using namespace ftnoc;

namespace {

FaultEvent event(std::int64_t t, FaultLocation loc, bool retest = false) {
  FaultEvent e;
  e.time = t;
  e.location = loc;
  e.retest_fail = retest;
  return e;
}

Msu::Config msu_config(std::uint64_t seed = 1) {
  Msu::Config c;
  c.seed = seed;
  c.costs = VirtualCostModel{10, 1, 2, 5, 10, 1};
  return c;
}

// 3x3 mesh running a 4-task chain.
struct Rig {
  ArchitectureGraph ag = build_mesh(3, 3);
  TaskGraph tg = support::chain({10, 20, 15, 10}, 3);
  Msu msu{tg, ag, msu_config()};
};

}  // namespace

TEST_CASE("classification thresholds") {
  ClassifierConfig c;
  c.intermittent_threshold = 3;
  c.permanent_threshold = 5;
  c.window = 100;
  const FaultLocation loc = TurnFault{1, 2};
  std::vector<FaultEvent> h{event(0, loc)};
  CHECK(classify(h, c) == FaultClass::Transient);
  h.push_back(event(10, loc));
  h.push_back(event(20, loc));
  CHECK(classify(h, c) == FaultClass::Intermittent);
  h.push_back(event(30, loc));
  h.push_back(event(40, loc));
  CHECK(classify(h, c) == FaultClass::Permanent);
  // Old events fall out of the window.
  std::vector<FaultEvent> spread{event(0, loc), event(100, loc), event(200, loc)};
  CHECK(classify(spread, c) == FaultClass::Transient);
  CHECK(classify(std::vector<FaultEvent>{event(5, loc, true)}, c) == FaultClass::Permanent);
  CHECK_THROWS_AS(classify(std::vector<FaultEvent>{}, c), EmptyHistory);
  c.permanent_threshold = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("severity policy") {
  Rig r;
  SystemHealthMap shm(r.ag);
  const auto net = r.msu.network(shm);
  const Mapping m{{0, 1, 1, 0}};
  const auto sched = asap_schedule(r.msu.problem(shm, net), m);
  CHECK(severity(FaultClass::Transient, m, sched, shm, *net.rg) == Severity::Ignore);
  CHECK(severity(FaultClass::Intermittent, m, sched, shm, *net.rg) == Severity::MapAndStore);

  SystemHealthMap pe = shm;
  apply_fault(pe, PeFault{1});
  CHECK(severity(FaultClass::Permanent, m, sched, pe, *r.msu.network(pe).rg) == Severity::Remap);

  // A link no route uses: recorded, no remap.
  SystemHealthMap unused = shm;
  const LinkId far = *r.ag.find_link(7, 8);
  for (const auto& f : sched.flows)
    for (LinkId l : f.route.links) REQUIRE(l != far);
  apply_fault(unused, LinkFault{far});
  CHECK(severity(FaultClass::Permanent, m, sched, unused, *r.msu.network(unused).rg) == Severity::Ignore);

  SystemHealthMap used = shm;
  apply_fault(used, LinkFault{*r.ag.find_link(0, 1)});
  CHECK(severity(FaultClass::Permanent, m, sched, used, *r.msu.network(used).rg) == Severity::Remap);
}

TEST_CASE("checker locations implicate shm elements") {
  const auto ag = build_mesh(2, 2);
  CHECK(implicated_faults(CheckerFault{0, CheckerUnit::RoutingLogic, std::nullopt}, ag).size() == 8);
  const auto arb = implicated_faults(CheckerFault{0, CheckerUnit::Arbiter, Direction::E}, ag);
  REQUIRE(arb.size() == 1);
  CHECK(arb[0] == Fault{LinkFault{*ag.find_link(0, 1)}});
  const auto fifo = implicated_faults(CheckerFault{0, CheckerUnit::FifoControl, Direction::E}, ag);
  CHECK(fifo[0] == Fault{LinkFault{*ag.find_link(1, 0)}});
  CHECK(implicated_faults(CheckerFault{0, CheckerUnit::DatapathParity, std::nullopt}, ag).size() == 2);
  CHECK(implicated_faults(CheckerFault{0, CheckerUnit::Arbiter, Direction::L}, ag)[0] == Fault{PeFault{0}});
  CHECK_THROWS_AS(implicated_faults(CheckerFault{0, CheckerUnit::Arbiter, Direction::W}, ag), UnknownTarget);
  CHECK_THROWS_AS(implicated_faults(PeFault{9}, ag), UnknownTarget);
}

TEST_CASE("fault tags") {
  const auto ag = build_mesh(4, 4);
  SystemHealthMap a(ag), b(ag);
  CHECK(fault_tag(a) == fault_tag(b));
  apply_fault(a, LinkFault{2});
  const auto t = fault_tag(a);
  const auto snap = snapshot(a);
  apply_fault(a, PeFault{3});
  restore(a, snap);
  CHECK(fault_tag(a) == t);
  CHECK(tag_hex(t).size() == 16);

  std::mt19937_64 rng(3);
  std::set<std::uint64_t> tags;
  const SystemHealthMap base(ag);
  const auto base_tag = fault_tag(base);
  for (int i = 0; i < 1000; ++i) {
    SystemHealthMap x = base;
    apply_fault(x, TurnFault{static_cast<TileId>(rng() % 16), static_cast<int>(rng() % 8)});
    CHECK(fault_tag(x) != base_tag);
    tags.insert(fault_tag(x));
  }
  CHECK(tags.size() == 16 * 8);  // every distinct flip has a distinct tag
}

TEST_CASE("mpfs prediction ranking") {
  ClassifierConfig c;
  c.window = 1000;
  c.intermittent_threshold = 3;
  c.permanent_threshold = 8;
  EventHistories h;
  CHECK(predict_mpfs(h, 2, c).empty());
  const FaultLocation a = PeFault{4}, b = LinkFault{2}, d = TurnFault{1, 1};
  for (int i = 0; i < 5; ++i) h[a].push_back(event(i, a));
  CHECK(predict_mpfs(h, 1, c) == std::vector<FaultLocation>{a});
  for (int i = 0; i < 3; ++i) h[b].push_back(event(i, b));
  h[d].push_back(event(0, d));
  CHECK(predict_mpfs(h, 1, c) == std::vector<FaultLocation>{a});
  CHECK(predict_mpfs(h, 5, c) == std::vector<FaultLocation>{a, b});
}

TEST_CASE("partial mappings") {
  CHECK(extract_partial_mapping(Mapping{{0, 1, 2, 3}}, Mapping{{0, 1, 5, 3}}) == PartialMapping{{2, 5}});
  CHECK(extract_partial_mapping(Mapping{{0, 1}}, Mapping{{0, 1}}).empty());
  CHECK(extract_partial_mapping(Mapping{{0, 1, 2}}, Mapping{{3, 4, 5}}).size() == 3);
  CHECK_THROWS_AS(extract_partial_mapping(Mapping{{0}}, Mapping{{0, 1}}), LengthMismatch);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    Mapping a, b;
    for (int k = 0; k < 10; ++k) {
      a.assignment.push_back(static_cast<TileId>(rng() % 4));
      b.assignment.push_back(static_cast<TileId>(rng() % 4));
    }
    CHECK(apply_partial_mapping(a, extract_partial_mapping(a, b)) == b);
  }
}

TEST_CASE("latency identities") {
  const auto miss = LatencyReport::miss(100, 5, 10);
  CHECK(miss.t_rl == 115);
  CHECK(miss.consistent());
  const auto hit = LatencyReport::hit_of(2, 8, 5, 10);
  CHECK(hit.t_rl == 25);
  CHECK(hit.consistent());
  CHECK(miss.t_rl - hit.t_rl == 100 - (2 + 8));
}

TEST_CASE("mpm store, lookup, collisions and eviction") {
  const auto ag = build_mesh(2, 2);
  Mpm mpm(2);
  auto entry_for = [&](const Fault& f, std::vector<TileId> a) {
    SystemHealthMap s(ag);
    apply_fault(s, f);
    return std::pair{s, MpmEntry{fault_tag(s), describe(f), std::make_shared<const SystemHealthMap>(s), std::move(a)}};
  };
  auto [sa, ea] = entry_for(PeFault{1}, {0, 2});
  auto [sb, eb] = entry_for(PeFault{2}, {0, 1});
  mpm.store(ea);
  REQUIRE(mpm.lookup(sa));
  CHECK(Mapping{mpm.lookup(sa)->assignment} == Mapping{{0, 2}});
  CHECK(fault_tag(sa) != fault_tag(sb));
  CHECK(mpm.lookup(sb) == nullptr);

  // Forged collision: same tag, different configuration.
  MpmEntry forged = eb;
  forged.tag = fault_tag(sa);
  Mpm m2;
  m2.store(forged);
  CHECK(m2.lookup(sa) == nullptr);

  mpm.store(eb);
  auto [sc, ec] = entry_for(PeFault{3}, {0, 0});
  mpm.store(ec);
  CHECK(mpm.size() == 2);
  CHECK(mpm.lookup(sa) == nullptr);  // oldest evicted
  CHECK(mpm.lookup(sc) != nullptr);
}

TEST_CASE("map_and_store restores the base shm") {
  Rig r;
  SystemHealthMap base(r.ag);
  apply_fault(base, LinkFault{5});
  const auto before = base.serialize();
  const auto tag = fault_tag(base);
  for (TileId t = 0; t < 9; ++t) {
    const auto e = map_and_store(base, PeFault{t}, r.msu);
    CHECK(base.serialize() == before);
    CHECK(fault_tag(base) == tag);
    for (TileId x : e.assignment) CHECK(x != t);
  }
  CHECK(r.msu.mpm().size() == 9);
  // A failing hypothetical also restores.
  CHECK_THROWS(map_and_store(base, PeFault{42}, r.msu));
  CHECK(base.serialize() == before);
}

TEST_CASE("map_and_deploy: hit schedule equals a fresh ASAP of the stored mapping") {
  Rig r;
  SystemHealthMap shm(r.ag);
  const auto first = map_and_deploy(shm, r.msu);
  CHECK_FALSE(first.latency.hit);
  CHECK(first.moves.size() == 4);
  CHECK(first.latency.t_par_map == 10 + 4);

  SystemHealthMap base = shm;
  map_and_store(base, PeFault{first.mapping[1]}, r.msu);
  SystemHealthMap faulted = shm;
  apply_fault(faulted, PeFault{first.mapping[1]});

  // Same fault without the stored entry.
  Msu cold(r.tg, r.ag, msu_config());
  map_and_deploy(shm, cold);
  const auto miss = map_and_deploy(faulted, cold);
  const auto hit = map_and_deploy(faulted, r.msu);
  CHECK(hit.latency.hit);
  CHECK_FALSE(miss.latency.hit);
  CHECK(hit.latency.consistent());
  CHECK(miss.latency.consistent());
  CHECK(hit.mapping == miss.mapping);
  CHECK(hit.latency.t_schd == 4);
  CHECK(miss.latency.t_rl - hit.latency.t_rl == miss.latency.t_map_alg - (hit.latency.t_fetch + hit.latency.t_schd));

  const auto net = r.msu.network(faulted);
  CHECK(hit.schedule == asap_schedule(r.msu.problem(faulted, net), hit.mapping));
  CHECK(r.msu.cmm()->mapping == hit.mapping);
  CHECK(r.msu.cmm()->tag == fault_tag(faulted));
}

TEST_CASE("shmu end to end") {
  Rig r;
  ShmuConfig cfg;
  cfg.classifier.window = 1000;
  cfg.classifier.intermittent_threshold = 2;
  cfg.classifier.permanent_threshold = 4;
  Shmu shmu(r.ag, SystemHealthMap(r.ag), r.msu, cfg);
  const auto dep = shmu.initial_deploy();
  CHECK(shmu.table_rebuilds() == 0);
  const TileId busy = dep.mapping[0];
  const auto tables_before = shmu.tables();

  auto a = shmu.on_event(event(10, PeFault{busy}));
  CHECK(a.action == "ignore");
  CHECK(shmu.tables() == tables_before);
  a = shmu.on_event(event(11, PeFault{busy}));
  CHECK(a.cls == FaultClass::Intermittent);
  CHECK(a.action == "map_and_store");
  CHECK(a.stored.size() == 1);
  CHECK(shmu.shm() == SystemHealthMap(r.ag));
  // Already cached: nothing new.
  a = shmu.on_event(event(12, PeFault{busy}));
  CHECK(a.stored.empty());

  a = shmu.on_event(event(20, PeFault{busy}, true));
  CHECK(a.cls == FaultClass::Permanent);
  CHECK(a.action == "remap_hit");
  REQUIRE(a.deploy);
  for (TileId t : a.deploy->mapping.assignment) CHECK(t != busy);
  CHECK(shmu.table_rebuilds() == 1);
  CHECK(shmu.shm().pe(busy) == Health::Broken);

  // A repeated report changes nothing.
  a = shmu.on_event(event(21, PeFault{busy}, true));
  CHECK(a.action == "ignore");
  CHECK(shmu.table_rebuilds() == 1);

  a = shmu.on_aging(30, 8, 20);
  CHECK((a.action == "record" || a.action.rfind("remap", 0) == 0));
  CHECK(shmu.decision_log().front().rfind("t=0 event=startup", 0) == 0);
  CHECK(shmu.decision_log().size() == 7);
}

TEST_CASE("full aging forces a remap off the PE") {
  Rig r;
  Shmu shmu(r.ag, SystemHealthMap(r.ag), r.msu, ShmuConfig{});
  const auto dep = shmu.initial_deploy();
  const auto a = shmu.on_aging(5, dep.mapping[0], 100);
  CHECK(a.severity == Severity::Remap);
  REQUIRE(a.deploy);
  for (TileId t : a.deploy->mapping.assignment) CHECK(t != dep.mapping[0]);
}
