// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ftnoc/geometry.hpp"

namespace ftnoc {

// ---------------------------------------------------------------------------
// Application model
// ---------------------------------------------------------------------------

enum class Criticality : std::uint8_t { NonCritical, Critical };

struct Task {
  int id = 0;
  std::int64_t wcet = 1;
  std::int64_t release = 0;
  Criticality criticality = Criticality::NonCritical;
  /// Critical tasks must finish by release + slack when set.
  std::optional<std::int64_t> slack;

  std::optional<std::int64_t> deadline() const {
    if (criticality != Criticality::Critical || !slack) return std::nullopt;
    return release + *slack;
  }
};

struct TaskEdge {
  int src = 0;
  int dst = 0;
  std::int64_t weight = 1;

  friend auto operator<=>(const TaskEdge&, const TaskEdge&) = default;
};

/// Validated, immutable acyclic task graph. Task ids are 0..m-1.
class TaskGraph {
 public:
  TaskGraph() = default;

  std::size_t size() const { return tasks_.size(); }
  const std::vector<Task>& tasks() const { return tasks_; }
  const Task& task(int id) const { return tasks_.at(static_cast<std::size_t>(id)); }

  /// Edges sorted by (src, dst). The index of an edge is its flow id.
  const std::vector<TaskEdge>& edges() const { return edges_; }

  /// Incoming edge indices of `id`, ascending by source task id.
  const std::vector<int>& in_edges(int id) const { return in_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& out_edges(int id) const { return out_[static_cast<std::size_t>(id)]; }

  /// Kahn order, smallest ready id first.
  const std::vector<int>& topological_order() const { return topo_; }

  std::int64_t total_edge_weight() const;

 private:
  friend TaskGraph build_task_graph(std::vector<Task>, std::vector<TaskEdge>);

  std::vector<Task> tasks_;
  std::vector<TaskEdge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
  std::vector<int> topo_;
};

/// Validates and freezes a task graph.
/// Throws InvalidGraphError (bad ids, wcet/weight), DanglingEdgeError, CycleError.
TaskGraph build_task_graph(std::vector<Task> tasks, std::vector<TaskEdge> edges);

struct RandomGraphParams {
  int tasks = 1;
  double density = 0.0;
  std::pair<std::int64_t, std::int64_t> wcet{1, 10};
  std::pair<std::int64_t, std::int64_t> weight{1, 10};
  std::uint64_t seed = 0;
};

/// Edges only run from lower to higher id, so the result is acyclic by construction.
TaskGraph random_task_graph(const RandomGraphParams& params);

enum class ClusterHeuristic : std::uint8_t { GreedyMerge, LocalSearch };

class ClusteredTaskGraph {
 public:
  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  int cluster_of(int task) const { return cluster_of_[static_cast<std::size_t>(task)]; }
  const std::vector<int>& assignment() const { return cluster_of_; }
  /// Inter-cluster edges keyed by (src cluster, dst cluster).
  const std::map<std::pair<int, int>, std::int64_t>& edges() const { return edges_; }
  std::int64_t inter_cluster_weight() const;

  static ClusteredTaskGraph from_assignment(const TaskGraph& tg, const std::vector<int>& cluster_of);

 private:
  std::vector<std::vector<int>> clusters_;
  std::vector<int> cluster_of_;
  std::map<std::pair<int, int>, std::int64_t> edges_;
};

/// Partitions the tasks into exactly k clusters minimising inter-cluster edge weight.
ClusteredTaskGraph cluster_tasks(const TaskGraph& tg, int k, ClusterHeuristic heuristic,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Platform model
// ---------------------------------------------------------------------------

struct Tile {
  TileId id = 0;
  Coord coord;
  bool pe_present = true;
};

struct Link {
  LinkId id = 0;
  TileId src = 0;
  Direction src_port = Direction::N;
  TileId dst = 0;
  Direction dst_port = Direction::S;
};

/// Immutable mesh. Degradation lives in the SystemHealthMap, never here.
class ArchitectureGraph {
 public:
  const MeshDims& dims() const { return dims_; }
  std::size_t tile_count() const { return tiles_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const std::vector<Tile>& tiles() const { return tiles_; }
  const std::vector<Link>& links() const { return links_; }
  const Tile& tile(TileId t) const { return tiles_.at(static_cast<std::size_t>(t)); }
  const Link& link(LinkId l) const { return links_.at(static_cast<std::size_t>(l)); }

  bool has_tile(TileId t) const { return t >= 0 && static_cast<std::size_t>(t) < tiles_.size(); }

  /// Outgoing link of `t` through port `d`, if the neighbour exists.
  std::optional<LinkId> out_link(TileId t, Direction d) const;
  std::optional<LinkId> in_link(TileId t, Direction d) const;
  std::optional<TileId> neighbor(TileId t, Direction d) const;
  std::optional<LinkId> find_link(TileId src, TileId dst) const;

 private:
  friend ArchitectureGraph build_mesh(int, int, std::optional<int>, const std::vector<TileId>&);

  MeshDims dims_;
  std::vector<Tile> tiles_;
  std::vector<Link> links_;
  std::vector<std::array<int, 7>> out_;  // per tile, per Direction value, -1 if absent
};

/// Builds a w×h (or w×h×d) mesh with both directions of every adjacency.
/// Links are numbered by source tile, then port order N, E, W, S, U, D.
/// Throws ZeroDimensionError.
ArchitectureGraph build_mesh(int width, int height, std::optional<int> depth = std::nullopt,
                             const std::vector<TileId>& without_pe = {});

}  // namespace ftnoc
