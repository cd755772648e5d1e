// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/mapsched.hpp"
#include "ftnoc/reachability.hpp"
#include "ftnoc/shmu.hpp"

namespace ftnoc {

enum class Persistence : std::uint8_t { Transient, Intermittent, Permanent };
std::string_view to_string(Persistence p);

struct Injection {
  std::int64_t time = 0;
  FaultLocation location;
  Persistence persistence = Persistence::Transient;
  int count = 1;               // intermittent bursts
  std::int64_t spacing = 0;    // intermittent bursts
  StuckType stuck = StuckType::SA0;
};

struct AgingUpdate {
  std::int64_t time = 0;
  TileId tile = 0;
  int percent = 0;
};

struct RegionSpec {
  std::string name;
  std::vector<TileId> tiles;
  std::optional<TurnModel> model;
};

/// A fully parsed scenario file. See README for the JSON schema.
struct Scenario {
  // application
  std::vector<Task> tasks;
  std::vector<TaskEdge> edges;
  std::optional<RandomGraphParams> random_graph;
  int clusters = 0;
  ClusterHeuristic cluster_heuristic = ClusterHeuristic::GreedyMerge;

  // platform
  int width = 2;
  int height = 2;
  std::optional<int> depth;
  std::vector<TileId> without_pe;
  TurnModel turn_model = TurnModel::xy();
  RouteChoice route_choice = RouteChoice::FirstShortest;
  int region_budget = kDefaultRegionBudget;
  std::vector<FaultLocation> initial_faults;
  std::vector<AgingUpdate> initial_aging;
  std::vector<RegionSpec> regions;

  HeuristicConfig heuristic;
  ClassifierConfig classifier;
  int mpfs_size = 1;
  std::size_t mpm_capacity = 16;

  CommModel comm;
  VirtualCostModel costs;
  std::int64_t detection_latency = 1;
  /// In-flight packets on a newly broken element: dropped (true) or delivered anyway.
  bool drop_in_flight = true;

  std::vector<Injection> injections;
  std::vector<AgingUpdate> aging;
  std::uint64_t seed = 0;
};

/// Throws ParseError (with line:column) or SemanticError (with JSON pointer and line).
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string& path);

/// Objects instantiated from a scenario. Construction validates the scenario
/// semantically and throws SemanticError on failure.
struct ScenarioInstance {
  TaskGraph tg;
  ArchitectureGraph ag;
  SystemHealthMap shm;
  Msu::Config msu;
  ShmuConfig shmu;
  std::optional<ClusteredTaskGraph> ctg;

  explicit ScenarioInstance(const Scenario& s);
};

/// Semantic validation on its own; returns the first error message or nullopt.
std::optional<std::string> validate_scenario(const Scenario& s);

}  // namespace ftnoc
