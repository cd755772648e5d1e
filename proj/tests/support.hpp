// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

// Small fixtures shared by the mapping and simulation tests.

#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ftnoc/error.hpp"
#include "ftnoc/mapsched.hpp"

namespace support {

using namespace ftnoc;

inline Task task(int id, std::int64_t wcet, std::int64_t release = 0) {
  Task t;
  t.id = id;
  t.wcet = wcet;
  t.release = release;
  return t;
}

inline TaskGraph chain(const std::vector<std::int64_t>& wcets, std::int64_t weight) {
  std::vector<Task> ts;
  std::vector<TaskEdge> es;
  for (std::size_t i = 0; i < wcets.size(); ++i) {
    ts.push_back(task(static_cast<int>(i), wcets[i]));
    if (i > 0) es.push_back({static_cast<int>(i) - 1, static_cast<int>(i), weight});
  }
  return build_task_graph(ts, es);
}

/// A mesh, its health and the routes derived from them.
struct Platform {
  ArchitectureGraph ag;
  SystemHealthMap shm;
  std::shared_ptr<const RoutingGraph> rg;
  std::unique_ptr<RouteFinder> routes;

  Platform(int w, int h, TurnModel model = TurnModel::xy()) : ag(build_mesh(w, h)), shm(ag), model_(std::move(model)) {
    refresh();
  }

  void fault(const Fault& f) {
    apply_fault(shm, f);
    refresh();
  }
  void refresh() {
    rg = std::make_shared<const RoutingGraph>(build_routing_graph(ag, model_, shm));
    routes = std::make_unique<RouteFinder>(rg, RoutePolicy{});
  }
  MappingProblem problem(const TaskGraph& tg, CommModel comm = {}) const {
    return MappingProblem{tg, ag, shm, *routes, comm, {}};
  }

 private:
  TurnModel model_;
};

/// Schedule validity restated from first principles. Returns the first violation.
inline std::string validate(const MappingProblem& p, const Mapping& m, const Schedule& s) {
  const auto& tg = p.tg;
  if (s.tasks.size() != tg.size()) return "task count";
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const auto& slot = s.tasks[i];
    if (slot.tile != m[i]) return "tile mismatch";
    if (!p.shm.pe_usable(slot.tile)) return "unusable PE";
    if (slot.start < tg.task(static_cast<int>(i)).release) return "before release";
    const auto w = effective_wcet(tg.task(static_cast<int>(i)).wcet, p.shm.aging(slot.tile));
    if (slot.finish - slot.start != *w) return "duration";
    for (std::size_t j = 0; j < i; ++j)
      if (s.tasks[j].tile == slot.tile && slot.start < s.tasks[j].finish && s.tasks[j].start < slot.finish)
        return "PE overlap";
  }
  std::int64_t makespan = 0;
  for (const auto& t : s.tasks) makespan = std::max(makespan, t.finish);
  if (makespan != s.makespan) return "makespan";
  const auto& rg = p.routes.graph();
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> busy(p.ag.link_count());
  for (std::size_t f = 0; f < tg.edges().size(); ++f) {
    const auto& e = tg.edges()[f];
    const auto& fr = s.flows[f];
    const auto& src = s.tasks[static_cast<std::size_t>(e.src)];
    const auto& dst = s.tasks[static_cast<std::size_t>(e.dst)];
    if (fr.retained) continue;
    if (src.tile == dst.tile) {
      if (!fr.route.nodes.empty()) return "local flow routed";
      if (dst.start < src.finish) return "local dependency";
      continue;
    }
    if (fr.route.nodes.empty() || !is_path_in(rg, fr.route.nodes)) return "route not in RG";
    if (fr.route.nodes.front() != rg.local_in(src.tile) || fr.route.nodes.back() != rg.local_out(dst.tile))
      return "route endpoints";
    for (LinkId l : fr.route.links)
      if (p.shm.link(l) != Health::Healthy) return "broken link";
    if (fr.inject < src.finish) return "injected early";
    const auto occupy = e.weight * p.comm.link_cycles;
    const auto arrival =
        fr.inject + occupy + static_cast<std::int64_t>(fr.route.links.size() + 1) * p.comm.router_delay;
    if (fr.arrival != arrival) return "arrival";
    if (dst.start < arrival) return "dependency";
    for (LinkId l : fr.route.links) busy[static_cast<std::size_t>(l)].push_back({fr.inject, fr.inject + occupy});
  }
  for (auto& iv : busy) {
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i)
      if (iv[i].first < iv[i - 1].second) return "link overlap";
  }
  return "";
}

/// Cost of a mapping with infeasible ones at +inf.
inline double cost_or_inf(const MappingProblem& p, const Mapping& m, CostKind k) {
  try {
    return evaluate_cost(asap_schedule(p, m), k);
  } catch (const UnroutableFlow&) {
    return std::numeric_limits<double>::infinity();
  } catch (const InvalidMapping&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace support
