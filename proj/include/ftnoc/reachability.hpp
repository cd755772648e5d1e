// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/routing.hpp"

namespace ftnoc {

/// Axis-aligned box given by two inclusive corners.
struct Rectangle {
  Coord lo;
  Coord hi;

  bool contains(Coord c) const {
    return lo.x <= c.x && c.x <= hi.x && lo.y <= c.y && c.y <= hi.y && lo.z <= c.z && c.z <= hi.z;
  }
  long volume() const {
    return static_cast<long>(hi.x - lo.x + 1) * (hi.y - lo.y + 1) * (hi.z - lo.z + 1);
  }
  static Rectangle bounding(const Rectangle& a, const Rectangle& b);

  friend auto operator<=>(const Rectangle&, const Rectangle&) = default;
};

std::string to_string(const Rectangle& r, bool three_d);

/// Destinations (other than `tile`) with no RG path from the output node of
/// `out_dir` to their local output. Throws UnknownPort when the tile has no
/// neighbour in that direction, UnknownTile for a bad tile.
std::set<TileId> unreachable_set(const RoutingGraph& rg, const ArchitectureGraph& ag, TileId tile,
                                 Direction out_dir);

/// Greedy maximal-box cover of `dest_set`, then nearest-pair bounding-box
/// merging until at most `budget` boxes remain. Deterministic.
/// Throws ConfigError when budget == 0 and the set is non-empty.
std::vector<Rectangle> cover_rectangles(const std::set<TileId>& dest_set, const MeshDims& dims,
                                        int budget);

/// Per-output-port unreachable regions of every router.
class PortRegionTable {
 public:
  int budget() const { return budget_; }
  const MeshDims& dims() const { return dims_; }

  /// Rectangles of (tile, dir); empty when the port does not exist.
  const std::vector<Rectangle>& regions(TileId tile, Direction dir) const;
  /// Physical output ports (neighbour exists) of a tile, in port order.
  const std::vector<Direction>& ports(TileId tile) const { return ports_[static_cast<std::size_t>(tile)]; }
  /// Local input can inject and local output can deliver.
  bool local_ok(TileId tile) const { return local_ok_[static_cast<std::size_t>(tile)]; }

  bool empty() const;
  /// One line per (tile, port): "tile <id> <coord> <dir>: <rects>|-".
  std::string dump() const;

  friend bool operator==(const PortRegionTable&, const PortRegionTable&) = default;

 private:
  friend PortRegionTable build_region_tables(const RoutingGraph&, const ArchitectureGraph&, int);

  int budget_ = 0;
  MeshDims dims_;
  std::vector<std::vector<Direction>> ports_;
  std::vector<std::vector<std::vector<Rectangle>>> regions_;  // [tile][port index in ports_]
  std::vector<bool> local_ok_;
};

inline constexpr int kDefaultRegionBudget = 4;

PortRegionTable build_region_tables(const RoutingGraph& rg, const ArchitectureGraph& ag, int budget);

/// True iff dst lies inside some rectangle of every output of src, i.e. no
/// port can reach it. Self-delivery is governed by the local connection.
bool should_drop(const PortRegionTable& tables, TileId src, TileId dst);

/// Region labels over tiles, each region optionally with its own turn model.
struct RegionAssignment {
  std::vector<int> region_of;                      // per tile
  std::vector<std::string> names;                  // per region
  std::vector<std::optional<TurnModel>> models;    // per region

  static RegionAssignment single(std::size_t tiles);
};

/// Routing spec with every external edge between different regions removed
/// and per-region turn models applied. Throws ConfigError if not total.
RoutingSpec partition(const ArchitectureGraph& ag, const RegionAssignment& regions,
                      const TurnModel& default_model);

}  // namespace ftnoc
