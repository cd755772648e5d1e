// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/health.hpp"
#include "ftnoc/turn_model.hpp"

namespace ftnoc {

enum class PortKind : std::uint8_t { In = 0, Out = 1 };

struct PortNode {
  TileId tile = 0;
  Direction dir = Direction::L;
  PortKind kind = PortKind::In;

  friend constexpr bool operator==(const PortNode&, const PortNode&) = default;
};

std::string to_string(const PortNode& n);

/// Inputs of a routing graph besides the mesh and its health.
///
/// `tile_models` overrides the turn model per tile (per-region routing) and
/// `link_allowed` removes external edges (network partitioning). Empty vectors
/// mean "no override".
struct RoutingSpec {
  TurnModel model = TurnModel::xy();
  std::vector<std::optional<TurnModel>> tile_models;
  std::vector<bool> link_allowed;

  const TurnModel& model_for(TileId t) const {
    const auto i = static_cast<std::size_t>(t);
    if (i < tile_models.size() && tile_models[i]) return *tile_models[i];
    return model;
  }
};

/// Port-level routing graph: 10 nodes per 2D router, 14 per 3D router.
class RoutingGraph {
 public:
  const MeshDims& dims() const { return dims_; }
  std::size_t node_count() const { return succ_.size(); }
  int ports_per_router() const { return ports_; }

  PortNode node(int id) const;
  /// -1 when the direction does not exist in this topology.
  int node_id(TileId tile, Direction dir, PortKind kind) const;
  int local_in(TileId t) const { return node_id(t, Direction::L, PortKind::In); }
  int local_out(TileId t) const { return node_id(t, Direction::L, PortKind::Out); }

  const std::vector<int>& successors(int node) const { return succ_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& predecessors(int node) const { return pred_[static_cast<std::size_t>(node)]; }
  bool has_edge(int from, int to) const;

  /// Link realised by the external edge leaving `out_node`, if present.
  std::optional<LinkId> link_of(int out_node) const;

  std::size_t internal_edge_count() const { return internal_; }
  std::size_t external_edge_count() const { return external_; }
  std::size_t edge_count() const { return internal_ + external_; }

  /// All edges as (from, to), ascending.
  std::vector<std::pair<int, int>> edges() const;

 private:
  friend RoutingGraph build_routing_graph(const ArchitectureGraph&, const RoutingSpec&,
                                          const SystemHealthMap&);

  MeshDims dims_;
  int ports_ = 5;
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
  std::vector<int> out_link_;  // per node, -1 unless an external edge leaves it
  std::size_t internal_ = 0;
  std::size_t external_ = 0;
};

/// Throws DimensionMismatch when the SHM does not belong to `ag`.
RoutingGraph build_routing_graph(const ArchitectureGraph& ag, const RoutingSpec& spec,
                                 const SystemHealthMap& shm);
RoutingGraph build_routing_graph(const ArchitectureGraph& ag, const TurnModel& model,
                                 const SystemHealthMap& shm);

/// True iff the graph has no directed cycle.
bool is_deadlock_free(const RoutingGraph& rg);

using Path = std::vector<PortNode>;

/// Simple paths from src's local input to dst's local output, at most `limit`,
/// ordered lexicographically by visited tile sequence.
std::vector<Path> find_paths(const RoutingGraph& rg, TileId src, TileId dst, std::size_t limit);

/// reach[s][d] is true iff some path exists from s's local input to d's local output.
std::vector<std::vector<bool>> reachability_matrix(const RoutingGraph& rg);

/// Nodes reachable from `start` (including itself).
std::vector<bool> reachable_from(const RoutingGraph& rg, int start);

// ---------------------------------------------------------------------------
// Route selection
// ---------------------------------------------------------------------------

enum class RouteChoice : std::uint8_t { FirstShortest, RandomShortest };

/// Adaptive routing picks uniformly among shortest next hops. The pick is a
/// pure function of (seed, flow key, step) so repeated queries agree.
struct RoutePolicy {
  RouteChoice choice = RouteChoice::FirstShortest;
  std::uint64_t seed = 0;
};

struct Route {
  std::vector<int> nodes;
  std::vector<LinkId> links;

  /// Routers traversed, source and destination included.
  std::size_t routers() const { return links.size() + 1; }
  friend bool operator==(const Route&, const Route&) = default;
};

class RouteFinder {
 public:
  RouteFinder(std::shared_ptr<const RoutingGraph> rg, RoutePolicy policy);

  const RoutingGraph& graph() const { return *rg_; }
  const RoutePolicy& policy() const { return policy_; }

  bool reachable(TileId src, TileId dst) const;
  std::optional<Route> route(TileId src, TileId dst, std::uint64_t flow_key) const;

 private:
  std::shared_ptr<const RoutingGraph> rg_;
  RoutePolicy policy_;
  // dist_[dst][node]: edges from node to dst's local output, -1 if unreachable.
  std::vector<std::vector<int>> dist_;
};

/// True iff every consecutive pair of `nodes` is an edge of `rg`.
bool is_path_in(const RoutingGraph& rg, const std::vector<int>& nodes);

}  // namespace ftnoc
