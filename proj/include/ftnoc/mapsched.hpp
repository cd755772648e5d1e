// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/health.hpp"
#include "ftnoc/routing.hpp"

namespace ftnoc {

/// assignment[i] is the tile whose PE executes task i.
struct Mapping {
  std::vector<TileId> assignment;

  std::size_t size() const { return assignment.size(); }
  TileId operator[](std::size_t i) const { return assignment[i]; }
  friend bool operator==(const Mapping&, const Mapping&) = default;
};

std::string to_string(const Mapping& m);

/// Flow latency = weight * link_cycles + routers * router_delay.
struct CommModel {
  std::int64_t link_cycles = 1;
  std::int64_t router_delay = 1;
};

struct TaskSlot {
  TileId tile = 0;
  std::int64_t start = 0;
  std::int64_t finish = 0;
  friend bool operator==(const TaskSlot&, const TaskSlot&) = default;
};

/// One TG edge realised as a packet flow. Co-located pairs have an empty route
/// and arrive when the sender finishes.
struct FlowRecord {
  int flow = 0;
  int src_task = 0;
  int dst_task = 0;
  TileId src_tile = 0;
  TileId dst_tile = 0;
  std::int64_t weight = 0;
  Route route;
  std::int64_t inject = 0;
  std::int64_t arrival = 0;
  /// Sender's output already delivered earlier (restart schedules only).
  bool retained = false;

  bool local() const { return route.nodes.empty(); }
  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct LinkInterval {
  int flow = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
  friend bool operator==(const LinkInterval&, const LinkInterval&) = default;
};

struct Schedule {
  std::vector<TaskSlot> tasks;
  std::vector<FlowRecord> flows;                   // indexed by flow id
  std::vector<std::vector<LinkInterval>> links;    // per link id, sorted by start
  std::vector<std::pair<TileId, std::int64_t>> pe_load;    // every usable PE
  std::vector<std::pair<LinkId, std::int64_t>> link_load;  // every healthy link
  std::int64_t makespan = 0;
  /// Number of task start-time computations performed by the pass.
  std::size_t start_computations = 0;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Restart context: tasks already completed keep their slot, everything else
/// starts no earlier than `not_before`.
struct ScheduleContext {
  std::vector<std::optional<TaskSlot>> fixed;
  std::int64_t not_before = 0;
};

/// Everything a mapper needs besides the mapping itself. Read-only views.
struct MappingProblem {
  const TaskGraph& tg;
  const ArchitectureGraph& ag;
  const SystemHealthMap& shm;
  const RouteFinder& routes;
  CommModel comm{};
  /// task -> group; groups move as a unit (clustered mapping). Empty = one group per task.
  std::vector<int> groups{};
};

/// Single topological pass. Throws UnroutableFlow, InvalidMapping.
Schedule asap_schedule(const MappingProblem& problem, const Mapping& mapping,
                       const ScheduleContext* context = nullptr);

enum class CostKind : std::uint8_t { ScheduleLength, TrafficBalance, UtilizationBalance };

std::string_view to_string(CostKind k);
std::optional<CostKind> parse_cost_kind(std::string_view s);

/// Makespan, or the population standard deviation of link / PE busy time.
double evaluate_cost(const Schedule& schedule, CostKind kind);

/// Human-readable table (task, tile, start, finish) plus per-link occupancy.
std::string dump(const Schedule& schedule);

/// Lists every violated schedule invariant; empty when valid.
std::vector<std::string> check_schedule(const MappingProblem& problem, const Mapping& mapping,
                                        const Schedule& schedule);

// ---------------------------------------------------------------------------
// Heuristics
// ---------------------------------------------------------------------------

enum class InitialPolicy : std::uint8_t { FirstFit, Random };

/// FirstFit deals tasks (or groups) round-robin over usable PEs in id order.
/// Throws NoHealthyPE.
Mapping initial_mapping(const TaskGraph& tg, const ArchitectureGraph& ag, const SystemHealthMap& shm,
                        InitialPolicy policy, std::uint64_t seed,
                        const std::vector<int>& groups = {});

struct MapResult {
  Mapping mapping;
  Schedule schedule;
  double cost = 0.0;
  double initial_cost = 0.0;
  /// Candidate mappings scheduled, the start included.
  std::size_t evaluations = 0;
  /// Best-so-far cost after each outer step.
  std::vector<double> trace;
};

/// Steepest descent over single-group relocations.
/// Throws NoHealthyPE, InfeasibleInstance.
MapResult map_greedy(const MappingProblem& problem, CostKind cost, const Mapping& start);

/// Perturb ceil(groups/4) groups, descend, keep best-so-far.
MapResult map_ils(const MappingProblem& problem, CostKind cost, const Mapping& start,
                  int iterations, std::uint64_t seed);

struct SaParams {
  std::optional<double> t0;  // default: initial cost
  double alpha = 0.97;
  int moves_per_temperature = 100;
  double t_min_ratio = 1e-3;
};

/// Simulated annealing with geometric cooling and Metropolis acceptance.
MapResult map_sa(const MappingProblem& problem, CostKind cost, const Mapping& start,
                 const SaParams& params, std::uint64_t seed);

enum class HeuristicKind : std::uint8_t { Greedy, Ils, Sa };

std::string_view to_string(HeuristicKind k);
std::optional<HeuristicKind> parse_heuristic(std::string_view s);

struct HeuristicConfig {
  HeuristicKind kind = HeuristicKind::Greedy;
  CostKind cost = CostKind::ScheduleLength;
  int ils_iterations = 10;
  SaParams sa{};
  InitialPolicy initial = InitialPolicy::FirstFit;
};

MapResult run_heuristic(const MappingProblem& problem, const HeuristicConfig& config,
                        const Mapping& start, std::uint64_t seed);

/// Moves tasks off unusable PEs (first usable PE in id order, groups kept together).
Mapping repair_mapping(const MappingProblem& problem, const Mapping& current);

}  // namespace ftnoc
