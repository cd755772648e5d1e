// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftnoc/mapsched.hpp"
#include "ftnoc/scenario.hpp"
#include "ftnoc/shmu.hpp"

namespace ftnoc {

/// Checker reports produced by one injection. Permanent faults carry the
/// retest-fail flag. Throws UnknownTarget.
std::vector<FaultEvent> inject(const Injection& injection, std::int64_t detection_latency,
                               const ArchitectureGraph& ag);

enum class DropReason : std::uint8_t { None, Unreachable, BrokenRoute, InFlight };
std::string_view to_string(DropReason r);

/// Lifetime of one packet flow in the simulation.
struct FlowTrace {
  int flow = 0;
  int epoch = 0;
  TileId src_tile = 0;
  TileId dst_tile = 0;
  std::vector<int> route;
  std::vector<LinkId> links;
  std::int64_t inject = 0;
  std::int64_t delivery = -1;
  bool dropped = false;
  DropReason reason = DropReason::None;
  std::vector<LinkInterval> occupancy;  // empty when dropped
};

struct RecoveryRecord {
  std::int64_t report_time = 0;
  std::int64_t deploy_time = 0;
};

struct Metrics {
  std::int64_t makespan = 0;
  bool completed = false;
  std::size_t tasks_finished = 0;
  std::vector<std::int64_t> link_busy;  // per link id
  std::size_t flows_injected = 0;
  std::size_t flows_delivered = 0;
  std::size_t dropped = 0;
  std::size_t remaps = 0;
  std::size_t mpm_hits = 0;
  std::size_t mpm_misses = 0;
  std::size_t mpm_stores = 0;
  std::size_t table_rebuilds = 0;
  std::vector<LatencyReport> latency;
  std::vector<RecoveryRecord> recoveries;

  /// key=value lines in a fixed order.
  std::string summary() const;
  /// "link,src,dst,busy" CSV rows.
  std::string link_table(const ArchitectureGraph& ag) const;
};

struct SimResult {
  Metrics metrics;
  std::vector<std::string> trace;      // "cycle kind payload"
  std::vector<std::string> decisions;  // SHMU decision log
  std::vector<FlowTrace> flows;
  std::string mpm_dump;
  Mapping initial_mapping;
  Schedule initial_schedule;
  Mapping final_mapping;
  Schedule final_schedule;
  SystemHealthMap final_shm;
  std::vector<std::optional<TaskSlot>> executed;  // actual per-task execution
};

/// Deterministic discrete-event run of a scenario.
/// Throws SemanticError before cycle 0 for invalid scenarios; mapping
/// errors (NoHealthyPE, InfeasibleInstance) propagate.
SimResult run(const Scenario& scenario);

std::string join_lines(const std::vector<std::string>& lines);

}  // namespace ftnoc
