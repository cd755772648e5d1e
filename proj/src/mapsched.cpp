// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/mapsched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ftnoc/error.hpp"

namespace ftnoc {

std::string to_string(const Mapping& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
  return s + "]";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Unroutable {
  TileId src = 0;
  TileId dst = 0;
};

std::size_t at(int i) { return static_cast<std::size_t>(i); }

// Earliest s >= from at which every link in `links` is idle over [s, s + len).
std::int64_t earliest_window(const std::vector<std::vector<LinkInterval>>& occ,
                             const std::vector<LinkId>& links, std::int64_t from, std::int64_t len) {
  std::int64_t s = from;
  for (bool moved = true; moved;) {
    moved = false;
    for (LinkId l : links)
      for (const LinkInterval& iv : occ[at(l)])
        if (iv.start < s + len && s < iv.end) {
          s = iv.end;
          moved = true;
        }
  }
  return s;
}

void insert_interval(std::vector<LinkInterval>& list, LinkInterval iv) {
  const auto pos = std::upper_bound(list.begin(), list.end(), iv, [](const LinkInterval& a, const LinkInterval& b) {
    return a.start < b.start;
  });
  list.insert(pos, iv);
}

// The scheduling pass proper. Returns nullopt and fills `bad` on an unroutable flow.
std::optional<Schedule> schedule_pass(const MappingProblem& p, const Mapping& mapping,
                                      const ScheduleContext* ctx, Unroutable* bad) {
  const TaskGraph& tg = p.tg;
  const auto m = tg.size();
  if (mapping.size() != m)
    throw InvalidMapping("mapping has " + std::to_string(mapping.size()) + " entries for " +
                         std::to_string(m) + " tasks");
  if (ctx && !ctx->fixed.empty() && ctx->fixed.size() != m)
    throw InvalidMapping("restart context does not match the task count");
  auto fixed = [&](int t) -> const std::optional<TaskSlot>* {
    if (!ctx || ctx->fixed.empty()) return nullptr;
    const auto& f = ctx->fixed[at(t)];
    return f ? &f : nullptr;
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (fixed(static_cast<int>(i))) continue;
    const TileId t = mapping[i];
    if (!p.ag.has_tile(t) || !p.shm.pe_usable(t))
      throw InvalidMapping("task " + std::to_string(i) + " is mapped to unusable tile " + std::to_string(t));
  }
  const std::int64_t not_before = ctx ? ctx->not_before : 0;
  const CommModel& cm = p.comm;

  Schedule s;
  s.tasks.resize(m);
  s.flows.resize(tg.edges().size());
  s.links.resize(p.ag.link_count());
  std::vector<std::int64_t> pe_free(p.ag.tile_count(), 0);

  for (int t : tg.topological_order()) {
    ++s.start_computations;
    if (const auto* f = fixed(t)) {
      s.tasks[at(t)] = **f;
      pe_free[at((*f)->tile)] = std::max(pe_free[at((*f)->tile)], (*f)->finish);
    } else {
      const Task& task = tg.task(t);
      const TileId tile = mapping[at(t)];
      std::int64_t start = std::max({task.release, not_before, pe_free[at(tile)]});
      for (int e : tg.in_edges(t)) start = std::max(start, s.flows[at(e)].arrival);
      const auto wcet = effective_wcet(task.wcet, p.shm.aging(tile));
      s.tasks[at(t)] = TaskSlot{tile, start, start + *wcet};
      pe_free[at(tile)] = start + *wcet;
    }

    // Outgoing flows leave once the sender finishes, in destination order.
    const TaskSlot& from = s.tasks[at(t)];
    for (int e : tg.out_edges(t)) {
      const TaskEdge& edge = tg.edges()[at(e)];
      FlowRecord fr;
      fr.flow = e;
      fr.src_task = edge.src;
      fr.dst_task = edge.dst;
      fr.src_tile = from.tile;
      fr.weight = edge.weight;
      if (const auto* g = fixed(edge.dst)) {
        // Receiver already completed: the data was delivered before the restart.
        fr.dst_tile = (*g)->tile;
        fr.retained = true;
        fr.inject = fr.arrival = from.finish;
        s.flows[at(e)] = std::move(fr);
        continue;
      }
      fr.dst_tile = mapping[at(edge.dst)];
      const std::int64_t ready = std::max(from.finish, fixed(t) ? not_before : from.finish);
      if (fr.src_tile == fr.dst_tile) {
        fr.inject = fr.arrival = ready;
      } else {
        auto route = p.routes.route(fr.src_tile, fr.dst_tile, static_cast<std::uint64_t>(e));
        if (!route) {
          if (bad) *bad = Unroutable{fr.src_tile, fr.dst_tile};
          return std::nullopt;
        }
        fr.route = std::move(*route);
        const std::int64_t len = edge.weight * cm.link_cycles;
        fr.inject = earliest_window(s.links, fr.route.links, ready, len);
        fr.arrival = fr.inject + len + static_cast<std::int64_t>(fr.route.routers()) * cm.router_delay;
        for (LinkId l : fr.route.links) insert_interval(s.links[at(l)], LinkInterval{e, fr.inject, fr.inject + len});
      }
      s.flows[at(e)] = std::move(fr);
    }
  }

  std::vector<std::int64_t> busy(p.ag.tile_count(), 0);
  for (const TaskSlot& ts : s.tasks) {
    busy[at(ts.tile)] += ts.finish - ts.start;
    s.makespan = std::max(s.makespan, ts.finish);
  }
  for (TileId t = 0; t < static_cast<TileId>(p.ag.tile_count()); ++t)
    if (p.shm.pe_usable(t)) s.pe_load.emplace_back(t, busy[at(t)]);
  for (LinkId l = 0; l < static_cast<LinkId>(p.ag.link_count()); ++l) {
    if (p.shm.link(l) != Health::Healthy) continue;
    std::int64_t total = 0;
    for (const LinkInterval& iv : s.links[at(l)]) total += iv.end - iv.start;
    s.link_load.emplace_back(l, total);
  }
  return s;
}

template <class T>
double population_stddev(const std::vector<std::pair<T, std::int64_t>>& values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& [_, v] : values) mean += static_cast<double>(v);
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const auto& [_, v] : values) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

bool meets_deadlines(const TaskGraph& tg, const Schedule& s) {
  for (const Task& t : tg.tasks())
    if (const auto d = t.deadline(); d && s.tasks[at(t.id)].finish > *d) return false;
  return true;
}

}  // namespace

Schedule asap_schedule(const MappingProblem& problem, const Mapping& mapping, const ScheduleContext* context) {
  Unroutable bad;
  auto s = schedule_pass(problem, mapping, context, &bad);
  if (!s) throw UnroutableFlow(bad.src, bad.dst);
  return std::move(*s);
}

std::string_view to_string(CostKind k) {
  switch (k) {
    case CostKind::ScheduleLength: return "schedule_length";
    case CostKind::TrafficBalance: return "traffic_balance";
    case CostKind::UtilizationBalance: return "utilization_balance";
  }
  return "?";
}

std::optional<CostKind> parse_cost_kind(std::string_view s) {
  if (s == "makespan" || s == "schedule_length") return CostKind::ScheduleLength;
  if (s == "traffic" || s == "traffic_balance") return CostKind::TrafficBalance;
  if (s == "util" || s == "utilization_balance") return CostKind::UtilizationBalance;
  return std::nullopt;
}

double evaluate_cost(const Schedule& schedule, CostKind kind) {
  switch (kind) {
    case CostKind::ScheduleLength: return static_cast<double>(schedule.makespan);
    case CostKind::TrafficBalance: return population_stddev(schedule.link_load);
    case CostKind::UtilizationBalance: return population_stddev(schedule.pe_load);
  }
  return 0.0;
}

std::string dump(const Schedule& schedule) {
  std::ostringstream os;
  os << "task tile start finish\n";
  for (std::size_t i = 0; i < schedule.tasks.size(); ++i) {
    const TaskSlot& t = schedule.tasks[i];
    os << i << ' ' << t.tile << ' ' << t.start << ' ' << t.finish << '\n';
  }
  os << "link intervals\n";
  for (std::size_t l = 0; l < schedule.links.size(); ++l) {
    if (schedule.links[l].empty()) continue;
    os << l << ':';
    for (const LinkInterval& iv : schedule.links[l]) os << " f" << iv.flow << "[" << iv.start << "," << iv.end << ")";
    os << '\n';
  }
  os << "makespan " << schedule.makespan << '\n';
  return os.str();
}

std::vector<std::string> check_schedule(const MappingProblem& p, const Mapping& mapping, const Schedule& s) {
  std::vector<std::string> v;
  auto fail = [&](std::string msg) { v.push_back(std::move(msg)); };
  const TaskGraph& tg = p.tg;
  if (s.tasks.size() != tg.size() || mapping.size() != tg.size()) {
    fail("task count mismatch");
    return v;
  }
  const RoutingGraph& rg = p.routes.graph();
  for (const Task& task : tg.tasks()) {
    const TaskSlot& ts = s.tasks[at(task.id)];
    const std::string name = "task " + std::to_string(task.id);
    if (ts.tile != mapping[at(task.id)]) fail(name + " not on its mapped tile");
    if (!p.shm.pe_usable(ts.tile)) fail(name + " on unusable PE " + std::to_string(ts.tile));
    const auto w = effective_wcet(task.wcet, p.shm.aging(ts.tile));
    if (!w || ts.finish != ts.start + *w) fail(name + " finish != start + effective wcet");
    if (ts.start < task.release) fail(name + " starts before release");
  }
  for (std::size_t e = 0; e < tg.edges().size(); ++e) {
    const TaskEdge& edge = tg.edges()[e];
    const FlowRecord& f = s.flows[e];
    const std::string name = "flow " + std::to_string(e);
    const TaskSlot& a = s.tasks[at(edge.src)];
    const TaskSlot& b = s.tasks[at(edge.dst)];
    if (f.inject < a.finish) fail(name + " injected before its sender finished");
    if (b.start < f.arrival) fail(name + " arrives after its receiver started");
    if (a.tile == b.tile) {
      if (!f.local()) fail(name + " routed between co-located tasks");
      continue;
    }
    const std::int64_t latency =
        f.weight * p.comm.link_cycles + static_cast<std::int64_t>(f.route.routers()) * p.comm.router_delay;
    if (f.arrival - f.inject != latency) fail(name + " latency mismatch");
    const auto& nodes = f.route.nodes;
    if (nodes.empty() || nodes.front() != rg.local_in(a.tile) || nodes.back() != rg.local_out(b.tile) ||
        !is_path_in(rg, nodes))
      fail(name + " route is not an RG path between its tiles");
    for (LinkId l : f.route.links)
      if (p.shm.link(l) != Health::Healthy) fail(name + " uses broken link " + std::to_string(l));
  }
  for (std::size_t l = 0; l < s.links.size(); ++l) {
    const auto& list = s.links[l];
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].start < list[i - 1].end) fail("overlapping flows on link " + std::to_string(l));
  }
  std::vector<std::vector<TaskSlot>> per_pe(p.ag.tile_count());
  for (const TaskSlot& ts : s.tasks) per_pe[at(ts.tile)].push_back(ts);
  for (std::size_t t = 0; t < per_pe.size(); ++t) {
    auto& list = per_pe[t];
    std::sort(list.begin(), list.end(), [](const TaskSlot& a, const TaskSlot& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].start < list[i - 1].finish) fail("overlapping tasks on PE " + std::to_string(t));
  }
  if (!meets_deadlines(tg, s)) fail("critical deadline missed");
  return v;
}

// ---------------------------------------------------------------------------
// Heuristics

namespace {

std::vector<TileId> usable_pes(const ArchitectureGraph& ag, const SystemHealthMap& shm) {
  std::vector<TileId> out;
  for (TileId t = 0; t < static_cast<TileId>(ag.tile_count()); ++t)
    if (shm.pe_usable(t)) out.push_back(t);
  if (out.empty()) throw NoHealthyPE("no usable processing element");
  return out;
}

// Task -> group, with one group per task when none are given.
std::vector<int> group_of(std::size_t m, const std::vector<int>& groups) {
  if (groups.empty()) {
    std::vector<int> g(m);
    std::iota(g.begin(), g.end(), 0);
    return g;
  }
  if (groups.size() != m) throw InvalidMapping("group list does not match the task count");
  return groups;
}

int group_count(const std::vector<int>& g) {
  return g.empty() ? 0 : *std::max_element(g.begin(), g.end()) + 1;
}

// Candidate evaluation shared by all searches.
class Evaluator {
 public:
  Evaluator(const MappingProblem& p, CostKind kind)
      : p_(p), kind_(kind), group_(group_of(p.tg.size(), p.groups)), groups_(group_count(group_)),
        pes_(usable_pes(p.ag, p.shm)) {
    members_.resize(at(groups_));
    for (std::size_t t = 0; t < group_.size(); ++t) members_[at(group_[t])].push_back(static_cast<int>(t));
  }

  // Infeasible (unroutable or missing a critical deadline) costs +inf.
  double cost(const Mapping& m, Schedule* out = nullptr) {
    ++evaluations;
    auto s = schedule_pass(p_, m, nullptr, nullptr);
    if (!s || !meets_deadlines(p_.tg, *s)) return kInf;
    const double c = evaluate_cost(*s, kind_);
    if (out) *out = std::move(*s);
    return c;
  }

  bool valid(const Mapping& m) const {
    if (m.size() != p_.tg.size()) return false;
    for (const auto& g : members_)
      for (int t : g) {
        if (!p_.shm.pe_usable(m[at(t)]) || m[at(t)] != m[at(g.front())]) return false;
      }
    return true;
  }

  void move(Mapping& m, int group, TileId tile) const {
    for (int t : members_[at(group)]) m.assignment[at(t)] = tile;
  }
  TileId tile_of(const Mapping& m, int group) const { return m[at(members_[at(group)].front())]; }

  int groups() const { return groups_; }
  const std::vector<TileId>& pes() const { return pes_; }
  const MappingProblem& problem() const { return p_; }
  std::size_t evaluations = 0;

 private:
  const MappingProblem& p_;
  CostKind kind_;
  std::vector<int> group_;
  int groups_;
  std::vector<TileId> pes_;
  std::vector<std::vector<int>> members_;
};

struct Point {
  Mapping mapping;
  double cost = kInf;
};

// Start, first-fit, then everything on each single PE.
Point probe_start(Evaluator& ev, const Mapping& start) {
  const MappingProblem& p = ev.problem();
  if (ev.valid(start)) {
    const double c = ev.cost(start);
    if (std::isfinite(c)) return {start, c};
  }
  const Mapping ff = initial_mapping(p.tg, p.ag, p.shm, InitialPolicy::FirstFit, 0, p.groups);
  if (const double c = ev.cost(ff); std::isfinite(c)) return {ff, c};
  for (TileId pe : ev.pes()) {
    Mapping all{std::vector<TileId>(p.tg.size(), pe)};
    if (const double c = ev.cost(all); std::isfinite(c)) return {all, c};
  }
  throw InfeasibleInstance("no probed mapping is routable and meets every critical deadline");
}

// Steepest descent from `cur`; cost may start at +inf.
Point descend(Evaluator& ev, Point cur, std::vector<double>* trace) {
  for (;;) {
    Point best = cur;
    for (int g = 0; g < ev.groups(); ++g) {
      const TileId here = ev.tile_of(cur.mapping, g);
      for (TileId pe : ev.pes()) {
        if (pe == here) continue;
        Mapping cand = cur.mapping;
        ev.move(cand, g, pe);
        const double c = ev.cost(cand);
        if (c < best.cost - 1e-9 || (std::isinf(best.cost) && std::isfinite(c))) best = {std::move(cand), c};
      }
    }
    if (!(best.cost < cur.cost) && !(std::isinf(cur.cost) && std::isfinite(best.cost))) return cur;
    cur = std::move(best);
    if (trace) trace->push_back(cur.cost);
  }
}

MapResult finish(Evaluator& ev, const Point& best, double initial, std::vector<double> trace) {
  MapResult r;
  r.mapping = best.mapping;
  r.cost = ev.cost(best.mapping, &r.schedule);
  r.initial_cost = initial;
  r.evaluations = ev.evaluations - 1;
  r.trace = std::move(trace);
  return r;
}

}  // namespace

Mapping initial_mapping(const TaskGraph& tg, const ArchitectureGraph& ag, const SystemHealthMap& shm,
                        InitialPolicy policy, std::uint64_t seed, const std::vector<int>& groups) {
  const auto pes = usable_pes(ag, shm);
  const auto g = group_of(tg.size(), groups);
  const int n = group_count(g);
  std::vector<TileId> tile_of_group(at(n));
  if (policy == InitialPolicy::FirstFit) {
    for (int i = 0; i < n; ++i) tile_of_group[at(i)] = pes[at(i) % pes.size()];
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pes.size() - 1);
    for (int i = 0; i < n; ++i) tile_of_group[at(i)] = pes[pick(rng)];
  }
  Mapping m;
  m.assignment.resize(tg.size());
  for (std::size_t t = 0; t < tg.size(); ++t) m.assignment[t] = tile_of_group[at(g[t])];
  return m;
}

MapResult map_greedy(const MappingProblem& problem, CostKind cost, const Mapping& start) {
  Evaluator ev(problem, cost);
  const Point s = probe_start(ev, start);
  std::vector<double> trace{s.cost};
  const Point best = descend(ev, s, &trace);
  return finish(ev, best, s.cost, std::move(trace));
}

namespace {

void perturb(Evaluator& ev, Mapping& m, std::mt19937_64& rng) {
  const int n = ev.groups();
  const int k = (n + 3) / 4;
  std::vector<int> order(at(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, ev.pes().size() - 1);
  for (int i = 0; i < k; ++i) ev.move(m, order[at(i)], ev.pes()[pick(rng)]);
}

}  // namespace

MapResult map_ils(const MappingProblem& problem, CostKind cost, const Mapping& start, int iterations,
                  std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("ILS needs at least one iteration");
  Evaluator ev(problem, cost);
  const Point s = probe_start(ev, start);
  Point best = descend(ev, s, nullptr);
  std::vector<double> trace{best.cost};
  std::mt19937_64 rng(seed);
  for (int it = 0; it < iterations; ++it) {
    Point cand{best.mapping, kInf};
    perturb(ev, cand.mapping, rng);
    cand.cost = ev.cost(cand.mapping);
    cand = descend(ev, std::move(cand), nullptr);
    if (cand.cost < best.cost - 1e-9) best = std::move(cand);
    trace.push_back(best.cost);
  }
  return finish(ev, best, s.cost, std::move(trace));
}

MapResult map_sa(const MappingProblem& problem, CostKind cost, const Mapping& start, const SaParams& params,
                 std::uint64_t seed) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ConfigError("SA alpha must be in (0, 1)");
  if (params.moves_per_temperature < 1) throw ConfigError("SA needs at least one move per temperature");
  if (!(params.t_min_ratio > 0.0 && params.t_min_ratio < 1.0)) throw ConfigError("SA Tmin ratio must be in (0, 1)");
  if (params.t0 && *params.t0 < 0.0) throw ConfigError("SA T0 must be non-negative");

  Evaluator ev(problem, cost);
  const Point s = probe_start(ev, start);
  Point cur = s, best = s;
  std::vector<double> trace{best.cost};
  const double t0 = params.t0.value_or(s.cost);
  const double t_min = params.t_min_ratio * (params.t0 ? *params.t0 : s.cost);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_group(0, std::max(0, ev.groups() - 1));
  std::uniform_int_distribution<std::size_t> pick_pe(0, ev.pes().size() - 1);

  if (ev.pes().size() > 1 && ev.groups() > 0) {
    for (double t = t0; t > t_min && t > 0.0; t *= params.alpha) {
      for (int k = 0; k < params.moves_per_temperature; ++k) {
        const int g = pick_group(rng);
        TileId to = ev.pes()[pick_pe(rng)];
        while (to == ev.tile_of(cur.mapping, g)) to = ev.pes()[pick_pe(rng)];
        Mapping cand = cur.mapping;
        ev.move(cand, g, to);
        const double c = ev.cost(cand);
        if (!std::isfinite(c)) continue;
        const double delta = c - cur.cost;
        if (delta <= 0.0 || unit(rng) < std::exp(-delta / t)) {
          cur = {std::move(cand), c};
          if (cur.cost < best.cost - 1e-9) best = cur;
        }
      }
      trace.push_back(best.cost);
    }
  }
  return finish(ev, best, s.cost, std::move(trace));
}

std::string_view to_string(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::Greedy: return "greedy";
    case HeuristicKind::Ils: return "ils";
    case HeuristicKind::Sa: return "sa";
  }
  return "?";
}

std::optional<HeuristicKind> parse_heuristic(std::string_view s) {
  if (s == "greedy") return HeuristicKind::Greedy;
  if (s == "ils") return HeuristicKind::Ils;
  if (s == "sa") return HeuristicKind::Sa;
  return std::nullopt;
}

MapResult run_heuristic(const MappingProblem& problem, const HeuristicConfig& config, const Mapping& start,
                        std::uint64_t seed) {
  switch (config.kind) {
    case HeuristicKind::Greedy: return map_greedy(problem, config.cost, start);
    case HeuristicKind::Ils: return map_ils(problem, config.cost, start, config.ils_iterations, seed);
    case HeuristicKind::Sa: return map_sa(problem, config.cost, start, config.sa, seed);
  }
  throw ConfigError("unknown heuristic");
}

Mapping repair_mapping(const MappingProblem& problem, const Mapping& current) {
  const auto pes = usable_pes(problem.ag, problem.shm);
  const auto g = group_of(problem.tg.size(), problem.groups);
  Mapping m = current;
  m.assignment.resize(problem.tg.size(), pes.front());
  const int n = group_count(g);
  std::vector<std::optional<TileId>> target(at(n));
  // A group lives where its first usable member sits, or on the first usable PE.
  for (std::size_t t = 0; t < m.size(); ++t) {
    auto& slot = target[at(g[t])];
    const TileId tile = m[t];
    if (!slot && problem.ag.has_tile(tile) && problem.shm.pe_usable(tile)) slot = tile;
  }
  for (std::size_t t = 0; t < m.size(); ++t) m.assignment[t] = target[at(g[t])].value_or(pes.front());
  return m;
}

}  // namespace ftnoc
