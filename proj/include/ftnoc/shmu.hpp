// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/health.hpp"
#include "ftnoc/mapsched.hpp"
#include "ftnoc/reachability.hpp"
#include "ftnoc/routing.hpp"

namespace ftnoc {

// ---------------------------------------------------------------------------
// Fault reports
// ---------------------------------------------------------------------------

enum class CheckerUnit : std::uint8_t { RoutingLogic, Arbiter, FifoControl, DatapathParity };

std::string_view to_string(CheckerUnit u);
std::optional<CheckerUnit> parse_checker_unit(std::string_view s);

/// A router checker firing. `port` narrows arbiter/fifo/parity reports to one side.
struct CheckerFault {
  TileId tile = 0;
  CheckerUnit unit = CheckerUnit::RoutingLogic;
  std::optional<Direction> port;
  friend auto operator<=>(const CheckerFault&, const CheckerFault&) = default;
};

using FaultLocation = std::variant<PeFault, TurnFault, LinkFault, CheckerFault>;

std::string describe(const FaultLocation& loc);

/// SHM elements a location stands for once it is known to be permanent.
/// Throws UnknownTarget.
std::vector<Fault> implicated_faults(const FaultLocation& loc, const ArchitectureGraph& ag);

enum class StuckType : std::uint8_t { SA0, SA1 };

struct FaultEvent {
  std::int64_t time = 0;  // report time
  FaultLocation location;
  StuckType stuck = StuckType::SA0;
  std::int64_t detection_latency = 1;
  /// Online retest confirmed a persistent failure.
  bool retest_fail = false;
};

enum class FaultClass : std::uint8_t { Transient, Intermittent, Permanent };
std::string_view to_string(FaultClass c);

struct ClassifierConfig {
  std::int64_t window = 10000;
  int intermittent_threshold = 3;
  int permanent_threshold = 8;

  /// Throws ConfigError unless window > 0 and N_p >= N_i >= 2.
  void validate() const;
};

/// Events at one location with latest.time - e.time < window.
int events_in_window(std::span<const FaultEvent> history, std::int64_t window);

/// Throws EmptyHistory.
FaultClass classify(std::span<const FaultEvent> history, const ClassifierConfig& config);

enum class Severity : std::uint8_t { Ignore, Remap, MapAndStore };
std::string_view to_string(Severity s);

/// Deployed mapping touches an unusable PE or a route that is not in `rg`.
bool deployment_affected(const Mapping& mapping, const Schedule& schedule,
                         const SystemHealthMap& shm, const RoutingGraph& rg);

/// Transient → Ignore, Intermittent → MapAndStore, Permanent → Remap iff the
/// deployment is affected under `shm` (already updated with the fault).
Severity severity(FaultClass cls, const Mapping& mapping, const Schedule& schedule,
                  const SystemHealthMap& shm, const RoutingGraph& rg);

/// 64-bit FNV-1a of the canonical SHM serialization.
std::uint64_t fault_tag(const SystemHealthMap& shm);
std::string tag_hex(std::uint64_t tag);

using EventHistories = std::map<FaultLocation, std::vector<FaultEvent>>;

/// Ranks intermittent locations by events per window (descending, ties by
/// location order) and returns the top k.
std::vector<FaultLocation> predict_mpfs(const EventHistories& histories, int k,
                                        const ClassifierConfig& config);

using MpfsPredictor =
    std::function<std::vector<FaultLocation>(const EventHistories&, int, const ClassifierConfig&)>;

// ---------------------------------------------------------------------------
// Mapper memories and latency accounting
// ---------------------------------------------------------------------------

struct MpmEntry {
  std::uint64_t tag = 0;
  std::string fault;                       // description of the hypothetical fault
  std::shared_ptr<const SystemHealthMap> config;  // exact configuration, for collision checks
  std::vector<TileId> assignment;
};

/// Fault-tagged cache of precomputed mappings, least-recently-stored eviction.
class Mpm {
 public:
  explicit Mpm(std::size_t capacity = 16) : capacity_(capacity) {}

  /// Replaces an entry with the same tag, otherwise evicts the oldest when full.
  void store(MpmEntry entry);
  /// Hit only when both tag and full configuration match.
  const MpmEntry* lookup(const SystemHealthMap& shm) const;
  bool contains_tag(std::uint64_t tag) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<MpmEntry>& entries() const { return entries_; }
  /// "tag=<hex> fault=<desc> assignment=<a,b,...>" per entry, storage order.
  std::string dump() const;

 private:
  std::size_t capacity_;
  std::deque<MpmEntry> entries_;
};

/// Cycle costs used to turn heuristic work into reconfiguration latency.
struct VirtualCostModel {
  std::int64_t cycles_per_evaluation = 10;
  std::int64_t cycles_per_task = 1;
  std::int64_t t_fetch = 2;
  std::int64_t t_par_ext = 5;
  std::int64_t t_par_map = 10;
  std::int64_t t_par_map_per_move = 1;
};

struct LatencyReport {
  std::int64_t t_map_alg = 0;
  std::int64_t t_par_ext = 0;
  std::int64_t t_par_map = 0;
  std::int64_t t_fetch = 0;
  std::int64_t t_schd = 0;
  std::int64_t t_rl = 0;
  bool hit = false;

  /// T_RL = T_MapAlg + T_ParExt + T_ParMap.
  static LatencyReport miss(std::int64_t map_alg, std::int64_t par_ext, std::int64_t par_map);
  /// T_RL = T_fetch + T_Schd + T_ParExt + T_ParMap.
  static LatencyReport hit_of(std::int64_t fetch, std::int64_t schd, std::int64_t par_ext,
                              std::int64_t par_map);
  /// The hit/miss identity holds for this report.
  bool consistent() const;
  std::string to_string() const;
};

struct CurrentMappingMemory {
  Mapping mapping;
  Schedule schedule;
  std::uint64_t tag = 0;
};

using PartialMapping = std::vector<std::pair<int, TileId>>;

/// Positions where the assignments differ, with the new tile. Throws LengthMismatch.
PartialMapping extract_partial_mapping(const Mapping& old_mapping, const Mapping& new_mapping);
Mapping apply_partial_mapping(Mapping base, const PartialMapping& moves);

/// Routing graph plus route finder for one SHM state.
struct Network {
  std::shared_ptr<const RoutingGraph> rg;
  RouteFinder routes;
};

/// The mapper/scheduler unit: read-only access to the SHM, owns the MPM and CMM.
class Msu {
 public:
  struct Config {
    RoutingSpec routing;
    RoutePolicy route_policy;
    HeuristicConfig heuristic;
    CommModel comm;
    VirtualCostModel costs;
    std::vector<int> groups;  // clustered mapping; empty = per task
    std::size_t mpm_capacity = 16;
    std::uint64_t seed = 0;
  };

  Msu(const TaskGraph& tg, const ArchitectureGraph& ag, Config config);

  const TaskGraph& tg() const { return *tg_; }
  const ArchitectureGraph& ag() const { return *ag_; }
  const Config& config() const { return config_; }

  Network network(const SystemHealthMap& shm) const;
  MappingProblem problem(const SystemHealthMap& shm, const Network& net) const;

  /// Runs the configured heuristic from `start` (repaired) or from the initial policy.
  /// The seed depends only on the scenario seed and the SHM tag.
  MapResult compute(const SystemHealthMap& shm, const std::optional<Mapping>& start) const;

  /// Starting point for a remap: the deployed mapping, if any.
  std::optional<Mapping> current_start() const;

  Mpm& mpm() { return mpm_; }
  const Mpm& mpm() const { return mpm_; }
  const std::optional<CurrentMappingMemory>& cmm() const { return cmm_; }
  void set_current(CurrentMappingMemory cmm) { cmm_ = std::move(cmm); }

 private:
  const TaskGraph* tg_;
  const ArchitectureGraph* ag_;
  Config config_;
  Mpm mpm_;
  std::optional<CurrentMappingMemory> cmm_;
};

/// Snapshot, apply the hypothetical fault, map, store under the modified tag,
/// restore. The base SHM is bit-identical afterwards even when mapping throws.
MpmEntry map_and_store(SystemHealthMap& base, const FaultLocation& hypothetical, Msu& msu);

struct DeployResult {
  Mapping mapping;
  Schedule schedule;
  LatencyReport latency;
  PartialMapping moves;
};

/// Looks the SHM up in the MPM; on a hit re-schedules the stored mapping,
/// otherwise runs the heuristic. Updates the CMM.
DeployResult map_and_deploy(const SystemHealthMap& shm, Msu& msu);

// ---------------------------------------------------------------------------
// Health monitoring unit
// ---------------------------------------------------------------------------

struct ShmuConfig {
  ClassifierConfig classifier;
  int mpfs_size = 1;
  int region_budget = kDefaultRegionBudget;
};

/// What the SHMU did with one report.
struct ShmuAction {
  std::int64_t time = 0;
  std::string event;
  FaultClass cls = FaultClass::Transient;
  Severity severity = Severity::Ignore;
  std::string action;
  std::optional<DeployResult> deploy;
  std::vector<std::uint64_t> stored;  // MPM tags written
  std::vector<std::string> warnings;
};

/// Sole writer of the SHM. Consumes checker reports, classifies them, keeps
/// routing and region tables in sync and orders the MSU around.
class Shmu {
 public:
  Shmu(const ArchitectureGraph& ag, SystemHealthMap initial, Msu& msu, ShmuConfig config);

  const SystemHealthMap& shm() const { return shm_; }
  const Network& network() const { return net_; }
  const PortRegionTable& tables() const { return tables_; }
  std::size_t table_rebuilds() const { return rebuilds_; }
  const EventHistories& histories() const { return histories_; }
  const std::vector<std::string>& decision_log() const { return log_; }

  void set_predictor(MpfsPredictor p) { predictor_ = std::move(p); }

  /// Maps and deploys on the current SHM (system start-up).
  DeployResult initial_deploy();

  ShmuAction on_event(const FaultEvent& event);
  ShmuAction on_aging(std::int64_t time, TileId tile, int percent);

 private:
  void rebuild();
  ShmuAction remap_if_affected(ShmuAction action);
  void record(const ShmuAction& a);

  const ArchitectureGraph* ag_;
  SystemHealthMap shm_;
  Msu* msu_;
  ShmuConfig config_;
  Network net_;
  PortRegionTable tables_;
  std::size_t rebuilds_ = 0;
  EventHistories histories_;
  MpfsPredictor predictor_;
  std::vector<std::string> log_;
};

}  // namespace ftnoc
