// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/shmu.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ftnoc/error.hpp"
#include "ftnoc/rng.hpp"

namespace ftnoc {

std::string_view to_string(CheckerUnit u) {
  switch (u) {
    case CheckerUnit::RoutingLogic: return "routing_logic";
    case CheckerUnit::Arbiter: return "arbiter";
    case CheckerUnit::FifoControl: return "fifo_control";
    case CheckerUnit::DatapathParity: return "datapath_parity";
  }
  return "?";
}

std::optional<CheckerUnit> parse_checker_unit(std::string_view s) {
  if (s == "routing_logic") return CheckerUnit::RoutingLogic;
  if (s == "arbiter") return CheckerUnit::Arbiter;
  if (s == "fifo_control") return CheckerUnit::FifoControl;
  if (s == "datapath_parity") return CheckerUnit::DatapathParity;
  return std::nullopt;
}

std::string describe(const FaultLocation& loc) {
  if (const auto* c = std::get_if<CheckerFault>(&loc)) {
    std::string s = "checker(" + std::to_string(c->tile) + "," + std::string(to_string(c->unit));
    if (c->port) s += "," + std::string(to_string(*c->port));
    return s + ")";
  }
  return std::visit(
      [](const auto& f) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, CheckerFault>) return "";
        else return describe(Fault{f});
      },
      loc);
}

std::vector<Fault> implicated_faults(const FaultLocation& loc, const ArchitectureGraph& ag) {
  auto need_tile = [&](TileId t) {
    if (!ag.has_tile(t)) throw UnknownTarget("tile " + std::to_string(t) + " does not exist");
  };
  const int slots = ag.dims().three_d ? kTurnSlots3d : kTurnSlots2d;
  if (const auto* p = std::get_if<PeFault>(&loc)) {
    need_tile(p->tile);
    return {*p};
  }
  if (const auto* t = std::get_if<TurnFault>(&loc)) {
    need_tile(t->tile);
    if (t->slot < 0 || t->slot >= slots) throw UnknownTarget("turn slot " + std::to_string(t->slot) + " does not exist");
    return {*t};
  }
  if (const auto* l = std::get_if<LinkFault>(&loc)) {
    if (l->link < 0 || static_cast<std::size_t>(l->link) >= ag.link_count())
      throw UnknownTarget("link " + std::to_string(l->link) + " does not exist");
    return {*l};
  }
  const auto& c = std::get<CheckerFault>(loc);
  need_tile(c.tile);
  std::vector<Fault> out;
  if (c.unit == CheckerUnit::RoutingLogic) {
    for (int s = 0; s < slots; ++s) out.push_back(TurnFault{c.tile, s});
    return out;
  }
  // Arbiters guard the outgoing side of a port; FIFO control and parity the incoming side.
  const bool outgoing = c.unit == CheckerUnit::Arbiter;
  auto port_fault = [&](Direction d) -> std::optional<Fault> {
    if (d == Direction::L) return PeFault{c.tile};
    const auto link = outgoing ? ag.out_link(c.tile, d) : ag.in_link(c.tile, d);
    if (!link) return std::nullopt;
    return LinkFault{*link};
  };
  if (c.port) {
    if (ag.dims().port_index(*c.port) < 0) throw UnknownTarget("port does not exist in this topology");
    auto f = port_fault(*c.port);
    if (!f) throw UnknownTarget("tile " + std::to_string(c.tile) + " has no " + std::string(to_string(*c.port)) + " link");
    return {*f};
  }
  for (Direction d : ag.dims().ports())
    if (d != Direction::L)
      if (auto f = port_fault(d)) out.push_back(*f);
  return out;
}

std::string_view to_string(FaultClass c) {
  switch (c) {
    case FaultClass::Transient: return "transient";
    case FaultClass::Intermittent: return "intermittent";
    case FaultClass::Permanent: return "permanent";
  }
  return "?";
}

void ClassifierConfig::validate() const {
  if (window <= 0) throw ConfigError("classifier window must be positive");
  if (intermittent_threshold < 2) throw ConfigError("intermittent threshold must be at least 2");
  if (permanent_threshold < intermittent_threshold)
    throw ConfigError("permanent threshold must not be below the intermittent threshold");
}

int events_in_window(std::span<const FaultEvent> history, std::int64_t window) {
  if (history.empty()) return 0;
  const std::int64_t latest = history.back().time;
  return static_cast<int>(std::count_if(history.begin(), history.end(),
                                        [&](const FaultEvent& e) { return latest - e.time < window; }));
}

FaultClass classify(std::span<const FaultEvent> history, const ClassifierConfig& config) {
  if (history.empty()) throw EmptyHistory("cannot classify an empty event history");
  const int n = events_in_window(history, config.window);
  if (n >= config.permanent_threshold || history.back().retest_fail) return FaultClass::Permanent;
  if (n >= config.intermittent_threshold) return FaultClass::Intermittent;
  return FaultClass::Transient;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Ignore: return "ignore";
    case Severity::Remap: return "remap";
    case Severity::MapAndStore: return "map_and_store";
  }
  return "?";
}

bool deployment_affected(const Mapping& mapping, const Schedule& schedule, const SystemHealthMap& shm,
                         const RoutingGraph& rg) {
  for (TileId t : mapping.assignment)
    if (!shm.pe_usable(t)) return true;
  for (const FlowRecord& f : schedule.flows)
    if (!f.local() && !is_path_in(rg, f.route.nodes)) return true;
  return false;
}

Severity severity(FaultClass cls, const Mapping& mapping, const Schedule& schedule, const SystemHealthMap& shm,
                  const RoutingGraph& rg) {
  switch (cls) {
    case FaultClass::Transient: return Severity::Ignore;
    case FaultClass::Intermittent: return Severity::MapAndStore;
    case FaultClass::Permanent:
      return deployment_affected(mapping, schedule, shm, rg) ? Severity::Remap : Severity::Ignore;
  }
  return Severity::Ignore;
}

std::uint64_t fault_tag(const SystemHealthMap& shm) { return fnv1a64(shm.serialize()); }

std::string tag_hex(std::uint64_t tag) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(tag));
  return buf;
}

std::vector<FaultLocation> predict_mpfs(const EventHistories& histories, int k, const ClassifierConfig& config) {
  std::vector<std::pair<int, FaultLocation>> ranked;
  for (const auto& [loc, events] : histories) {
    if (events.empty() || classify(events, config) != FaultClass::Intermittent) continue;
    ranked.emplace_back(events_in_window(events, config.window), loc);
  }
  // Map order already sorts by location; the stable sort keeps it for ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<FaultLocation> out;
  for (const auto& [_, loc] : ranked) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(loc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MPM

void Mpm::store(MpmEntry entry) {
  if (capacity_ == 0) return;
  std::erase_if(entries_, [&](const MpmEntry& e) { return e.tag == entry.tag; });
  entries_.push_back(std::move(entry));
  while (entries_.size() > capacity_) entries_.pop_front();
}

const MpmEntry* Mpm::lookup(const SystemHealthMap& shm) const {
  const std::uint64_t tag = fault_tag(shm);
  for (const MpmEntry& e : entries_)
    if (e.tag == tag && e.config && e.config->same_shape(shm) && *e.config == shm) return &e;
  return nullptr;
}

bool Mpm::contains_tag(std::uint64_t tag) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const MpmEntry& e) { return e.tag == tag; });
}

std::string Mpm::dump() const {
  std::ostringstream os;
  for (const MpmEntry& e : entries_) {
    os << "tag=" << tag_hex(e.tag) << " fault=" << e.fault << " assignment=";
    for (std::size_t i = 0; i < e.assignment.size(); ++i) os << (i ? "," : "") << e.assignment[i];
    os << '\n';
  }
  return os.str();
}

LatencyReport LatencyReport::miss(std::int64_t map_alg, std::int64_t par_ext, std::int64_t par_map) {
  LatencyReport r;
  r.t_map_alg = map_alg;
  r.t_par_ext = par_ext;
  r.t_par_map = par_map;
  r.t_rl = map_alg + par_ext + par_map;
  return r;
}

LatencyReport LatencyReport::hit_of(std::int64_t fetch, std::int64_t schd, std::int64_t par_ext,
                                    std::int64_t par_map) {
  LatencyReport r;
  r.t_fetch = fetch;
  r.t_schd = schd;
  r.t_par_ext = par_ext;
  r.t_par_map = par_map;
  r.t_rl = fetch + schd + par_ext + par_map;
  r.hit = true;
  return r;
}

bool LatencyReport::consistent() const {
  if (hit) return t_rl == t_fetch + t_schd + t_par_ext + t_par_map;
  return t_rl == t_map_alg + t_par_ext + t_par_map;
}

std::string LatencyReport::to_string() const {
  std::ostringstream os;
  if (hit)
    os << "hit t_fetch=" << t_fetch << " t_schd=" << t_schd;
  else
    os << "miss t_map_alg=" << t_map_alg;
  os << " t_par_ext=" << t_par_ext << " t_par_map=" << t_par_map << " t_rl=" << t_rl;
  return os.str();
}

PartialMapping extract_partial_mapping(const Mapping& old_mapping, const Mapping& new_mapping) {
  if (old_mapping.size() != new_mapping.size())
    throw LengthMismatch("mappings differ in length: " + std::to_string(old_mapping.size()) + " vs " +
                         std::to_string(new_mapping.size()));
  PartialMapping moves;
  for (std::size_t i = 0; i < old_mapping.size(); ++i)
    if (old_mapping[i] != new_mapping[i]) moves.emplace_back(static_cast<int>(i), new_mapping[i]);
  return moves;
}

Mapping apply_partial_mapping(Mapping base, const PartialMapping& moves) {
  for (const auto& [task, tile] : moves) {
    if (task < 0 || static_cast<std::size_t>(task) >= base.size())
      throw LengthMismatch("move for task " + std::to_string(task) + " is out of range");
    base.assignment[static_cast<std::size_t>(task)] = tile;
  }
  return base;
}

// ---------------------------------------------------------------------------
// MSU

Msu::Msu(const TaskGraph& tg, const ArchitectureGraph& ag, Config config)
    : tg_(&tg), ag_(&ag), config_(std::move(config)), mpm_(config_.mpm_capacity) {}

Network Msu::network(const SystemHealthMap& shm) const {
  auto rg = std::make_shared<const RoutingGraph>(build_routing_graph(*ag_, config_.routing, shm));
  RouteFinder routes(rg, config_.route_policy);
  return Network{std::move(rg), std::move(routes)};
}

MappingProblem Msu::problem(const SystemHealthMap& shm, const Network& net) const {
  return MappingProblem{*tg_, *ag_, shm, net.routes, config_.comm, config_.groups};
}

MapResult Msu::compute(const SystemHealthMap& shm, const std::optional<Mapping>& start) const {
  const Network net = network(shm);
  const MappingProblem p = problem(shm, net);
  const Mapping from = start ? repair_mapping(p, *start)
                             : initial_mapping(*tg_, *ag_, shm, config_.heuristic.initial,
                                               substream(config_.seed, "mapping"), config_.groups);
  const std::uint64_t seed = splitmix64(substream(config_.seed, "heuristic") ^ fault_tag(shm));
  return run_heuristic(p, config_.heuristic, from, seed);
}

std::optional<Mapping> Msu::current_start() const {
  if (!cmm_) return std::nullopt;
  return cmm_->mapping;
}

MpmEntry map_and_store(SystemHealthMap& base, const FaultLocation& hypothetical, Msu& msu) {
  const ShmSnapshot snap = snapshot(base);
  try {
    for (const Fault& f : implicated_faults(hypothetical, msu.ag())) apply_fault(base, f);
    const MapResult r = msu.compute(base, msu.current_start());
    MpmEntry entry{fault_tag(base), describe(hypothetical), std::make_shared<const SystemHealthMap>(base),
                   r.mapping.assignment};
    msu.mpm().store(entry);
    restore(base, snap);
    return entry;
  } catch (...) {
    restore(base, snap);
    throw;
  }
}

DeployResult map_and_deploy(const SystemHealthMap& shm, Msu& msu) {
  const Network net = msu.network(shm);
  const MappingProblem p = msu.problem(shm, net);
  const VirtualCostModel& costs = msu.config().costs;

  DeployResult out;
  const MpmEntry* hit = msu.mpm().lookup(shm);
  std::int64_t map_alg = 0;
  if (hit) {
    out.mapping = Mapping{hit->assignment};
    out.schedule = asap_schedule(p, out.mapping);
  } else {
    MapResult r = msu.compute(shm, msu.current_start());
    out.mapping = std::move(r.mapping);
    out.schedule = std::move(r.schedule);
    map_alg = static_cast<std::int64_t>(r.evaluations) * costs.cycles_per_evaluation;
  }

  if (const auto& cmm = msu.cmm()) {
    out.moves = extract_partial_mapping(cmm->mapping, out.mapping);
  } else {
    for (std::size_t i = 0; i < out.mapping.size(); ++i) out.moves.emplace_back(static_cast<int>(i), out.mapping[i]);
  }
  const std::int64_t par_map = costs.t_par_map + static_cast<std::int64_t>(out.moves.size()) * costs.t_par_map_per_move;
  out.latency = hit ? LatencyReport::hit_of(costs.t_fetch,
                                            static_cast<std::int64_t>(msu.tg().size()) * costs.cycles_per_task,
                                            costs.t_par_ext, par_map)
                    : LatencyReport::miss(map_alg, costs.t_par_ext, par_map);
  msu.set_current(CurrentMappingMemory{out.mapping, out.schedule, fault_tag(shm)});
  return out;
}

// ---------------------------------------------------------------------------
// SHMU

Shmu::Shmu(const ArchitectureGraph& ag, SystemHealthMap initial, Msu& msu, ShmuConfig config)
    : ag_(&ag), shm_(std::move(initial)), msu_(&msu), config_(config), net_(msu.network(shm_)),
      tables_(build_region_tables(*net_.rg, ag, config.region_budget)), predictor_(predict_mpfs) {
  config_.classifier.validate();
  if (config_.mpfs_size < 0) throw ConfigError("MPFS size must be non-negative");
}

void Shmu::rebuild() {
  net_ = msu_->network(shm_);
  tables_ = build_region_tables(*net_.rg, *ag_, config_.region_budget);
  ++rebuilds_;
}

void Shmu::record(const ShmuAction& a) {
  std::ostringstream os;
  os << "t=" << a.time << " event=" << a.event << " class=" << to_string(a.cls)
     << " severity=" << to_string(a.severity) << " action=" << a.action << " t_rl=";
  if (a.deploy)
    os << a.deploy->latency.t_rl;
  else
    os << '-';
  log_.push_back(os.str());
  for (const std::string& w : a.warnings) log_.push_back("t=" + std::to_string(a.time) + " warning=" + w);
}

DeployResult Shmu::initial_deploy() {
  DeployResult r = map_and_deploy(shm_, *msu_);
  log_.push_back("t=0 event=startup class=- severity=- action=deploy t_rl=" + std::to_string(r.latency.t_rl));
  return r;
}

ShmuAction Shmu::remap_if_affected(ShmuAction action) {
  const auto& cmm = msu_->cmm();
  const bool affected = cmm && deployment_affected(cmm->mapping, cmm->schedule, shm_, *net_.rg);
  action.severity = affected ? Severity::Remap : Severity::Ignore;
  if (affected) {
    try {
      action.deploy = map_and_deploy(shm_, *msu_);
      action.action = action.deploy->latency.hit ? "remap_hit" : "remap_miss";
    } catch (const Error& e) {
      action.action = "remap_failed";
      action.warnings.push_back(e.what());
    }
  }
  return action;
}

ShmuAction Shmu::on_event(const FaultEvent& event) {
  auto& history = histories_[event.location];
  history.push_back(event);
  ShmuAction a;
  a.time = event.time;
  a.event = describe(event.location);
  a.cls = classify(history, config_.classifier);

  switch (a.cls) {
    case FaultClass::Transient:
      a.severity = Severity::Ignore;
      a.action = "ignore";
      break;
    case FaultClass::Intermittent: {
      a.severity = Severity::MapAndStore;
      a.action = "map_and_store";
      for (const FaultLocation& hyp : predictor_(histories_, config_.mpfs_size, config_.classifier)) {
        try {
          SystemHealthMap probe = shm_;
          for (const Fault& f : implicated_faults(hyp, *ag_)) apply_fault(probe, f);
          if (msu_->mpm().lookup(probe)) continue;
          a.stored.push_back(map_and_store(shm_, hyp, *msu_).tag);
        } catch (const Error& e) {
          a.warnings.push_back("map_and_store " + describe(hyp) + ": " + e.what());
        }
      }
      break;
    }
    case FaultClass::Permanent: {
      bool changed = false;
      for (const Fault& f : implicated_faults(event.location, *ag_))
        if (!shm_.is_broken(f)) {
          apply_fault(shm_, f);
          changed = true;
        }
      if (changed) rebuild();
      a = remap_if_affected(std::move(a));
      if (!a.deploy && a.action.empty()) a.action = changed ? "record" : "ignore";
      break;
    }
  }
  record(a);
  return a;
}

ShmuAction Shmu::on_aging(std::int64_t time, TileId tile, int percent) {
  set_aging(shm_, tile, percent);
  ShmuAction a;
  a.time = time;
  a.event = "aging(" + std::to_string(tile) + "," + std::to_string(percent) + ")";
  a.cls = FaultClass::Permanent;
  a = remap_if_affected(std::move(a));
  if (!a.deploy && a.action.empty()) a.action = "record";
  record(a);
  return a;
}

}  // namespace ftnoc
