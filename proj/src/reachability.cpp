// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/reachability.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "ftnoc/error.hpp"

namespace ftnoc {

Rectangle Rectangle::bounding(const Rectangle& a, const Rectangle& b) {
  return Rectangle{Coord{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y), std::min(a.lo.z, b.lo.z)},
                   Coord{std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y), std::max(a.hi.z, b.hi.z)}};
}

std::string to_string(const Rectangle& r, bool three_d) {
  return "[" + to_string(r.lo, three_d) + "-" + to_string(r.hi, three_d) + "]";
}

std::set<TileId> unreachable_set(const RoutingGraph& rg, const ArchitectureGraph& ag, TileId tile,
                                 Direction out_dir) {
  if (!ag.has_tile(tile)) throw UnknownTile("tile " + std::to_string(tile) + " does not exist");
  if (out_dir == Direction::L || ag.dims().port_index(out_dir) < 0 || !ag.neighbor(tile, out_dir))
    throw UnknownPort("tile " + std::to_string(tile) + " has no " + std::string(to_string(out_dir)) +
                      " output");
  const auto seen = reachable_from(rg, rg.node_id(tile, out_dir, PortKind::Out));
  std::set<TileId> out;
  for (TileId d = 0; d < static_cast<TileId>(ag.tile_count()); ++d)
    if (d != tile && !seen[static_cast<std::size_t>(rg.local_out(d))]) out.insert(d);
  return out;
}

namespace {

// Inclusive-exclusive prefix counts over a boolean 3D grid.
class PrefixGrid {
 public:
  explicit PrefixGrid(const MeshDims& d) : w_(d.width), h_(d.height), z_(d.depth),
      sum_(static_cast<std::size_t>((w_ + 1) * (h_ + 1) * (z_ + 1)), 0) {}

  void build(const std::vector<bool>& cell) {
    std::fill(sum_.begin(), sum_.end(), 0);
    for (int z = 1; z <= z_; ++z)
      for (int y = 1; y <= h_; ++y)
        for (int x = 1; x <= w_; ++x) {
          const int v = cell[static_cast<std::size_t>((x - 1) + (y - 1) * w_ + (z - 1) * w_ * h_)] ? 1 : 0;
          at(x, y, z) = v + at(x - 1, y, z) + at(x, y - 1, z) + at(x, y, z - 1) - at(x - 1, y - 1, z) -
                        at(x - 1, y, z - 1) - at(x, y - 1, z - 1) + at(x - 1, y - 1, z - 1);
        }
  }

  long count(const Rectangle& r) const {
    const int x0 = r.lo.x, y0 = r.lo.y, z0 = r.lo.z;
    const int x1 = r.hi.x + 1, y1 = r.hi.y + 1, z1 = r.hi.z + 1;
    return get(x1, y1, z1) - get(x0, y1, z1) - get(x1, y0, z1) - get(x1, y1, z0) + get(x0, y0, z1) +
           get(x0, y1, z0) + get(x1, y0, z0) - get(x0, y0, z0);
  }

 private:
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x + y * (w_ + 1) + z * (w_ + 1) * (h_ + 1));
  }
  int& at(int x, int y, int z) { return sum_[index(x, y, z)]; }
  long get(int x, int y, int z) const { return sum_[index(x, y, z)]; }

  int w_, h_, z_;
  std::vector<int> sum_;
};

bool contains_box(const Rectangle& outer, const Rectangle& inner) {
  return outer.contains(inner.lo) && outer.contains(inner.hi);
}

}  // namespace

std::vector<Rectangle> cover_rectangles(const std::set<TileId>& dest_set, const MeshDims& dims,
                                        int budget) {
  if (dest_set.empty()) return {};
  if (budget < 1) throw ConfigError("region budget must be at least 1 for a non-empty set");

  const auto n = static_cast<std::size_t>(dims.tile_count());
  std::vector<bool> member(n, false);
  for (TileId t : dest_set) member.at(static_cast<std::size_t>(t)) = true;

  PrefixGrid in_set(dims);
  in_set.build(member);

  // Every box lying fully inside the set. Maximality is implied by the gain
  // rule below, which prefers the larger of two boxes with equal gain.
  std::vector<Rectangle> boxes;
  for (int z0 = 0; z0 < dims.depth; ++z0)
    for (int y0 = 0; y0 < dims.height; ++y0)
      for (int x0 = 0; x0 < dims.width; ++x0) {
        if (!member[static_cast<std::size_t>(dims.id({x0, y0, z0}))]) continue;
        for (int z1 = z0; z1 < dims.depth; ++z1)
          for (int y1 = y0; y1 < dims.height; ++y1)
            for (int x1 = x0; x1 < dims.width; ++x1) {
              const Rectangle r{{x0, y0, z0}, {x1, y1, z1}};
              if (in_set.count(r) == r.volume()) boxes.push_back(r);
            }
      }

  std::vector<bool> uncovered = member;
  std::size_t left = dest_set.size();
  PrefixGrid open(dims);
  std::vector<Rectangle> out;
  while (left > 0) {
    open.build(uncovered);
    const Rectangle* best = nullptr;
    long best_gain = 0;
    for (const Rectangle& r : boxes) {
      const long gain = open.count(r);
      if (gain == 0) continue;
      if (!best || gain > best_gain || (gain == best_gain && r.volume() > best->volume())) {
        best = &r;
        best_gain = gain;
      }
    }
    out.push_back(*best);
    for (int z = best->lo.z; z <= best->hi.z; ++z)
      for (int y = best->lo.y; y <= best->hi.y; ++y)
        for (int x = best->lo.x; x <= best->hi.x; ++x) {
          auto cell = uncovered[static_cast<std::size_t>(dims.id({x, y, z}))];
          if (cell) {
            cell = false;
            --left;
          }
        }
  }

  auto order = [&](const Rectangle& a, const Rectangle& b) {
    return std::pair(dims.id(a.lo), dims.id(a.hi)) < std::pair(dims.id(b.lo), dims.id(b.hi));
  };
  std::sort(out.begin(), out.end(), order);

  while (out.size() > static_cast<std::size_t>(budget)) {
    std::size_t bi = 0, bj = 1;
    long best = std::numeric_limits<long>::max();
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        const long v = Rectangle::bounding(out[i], out[j]).volume();
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    const Rectangle merged = Rectangle::bounding(out[bi], out[bj]);
    std::erase_if(out, [&](const Rectangle& r) { return contains_box(merged, r); });
    out.push_back(merged);
    std::sort(out.begin(), out.end(), order);
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<Rectangle>& PortRegionTable::regions(TileId tile, Direction dir) const {
  static const std::vector<Rectangle> kNone;
  const auto& ports = ports_.at(static_cast<std::size_t>(tile));
  const auto it = std::find(ports.begin(), ports.end(), dir);
  if (it == ports.end()) return kNone;
  return regions_[static_cast<std::size_t>(tile)][static_cast<std::size_t>(it - ports.begin())];
}

bool PortRegionTable::empty() const {
  for (const auto& tile : regions_)
    for (const auto& port : tile)
      if (!port.empty()) return false;
  return true;
}

std::string PortRegionTable::dump() const {
  std::ostringstream os;
  for (std::size_t t = 0; t < ports_.size(); ++t)
    for (std::size_t p = 0; p < ports_[t].size(); ++p) {
      const auto tile = static_cast<TileId>(t);
      os << "tile " << tile << ' ' << to_string(dims_.coord(tile), dims_.three_d) << ' '
         << to_string(ports_[t][p]) << ": ";
      const auto& rects = regions_[t][p];
      if (rects.empty()) os << '-';
      for (std::size_t i = 0; i < rects.size(); ++i)
        os << (i ? " " : "") << to_string(rects[i], dims_.three_d);
      os << '\n';
    }
  return os.str();
}

PortRegionTable build_region_tables(const RoutingGraph& rg, const ArchitectureGraph& ag, int budget) {
  PortRegionTable tables;
  tables.budget_ = budget;
  tables.dims_ = ag.dims();
  const auto n = ag.tile_count();
  tables.ports_.resize(n);
  tables.regions_.resize(n);
  tables.local_ok_.resize(n);
  for (TileId t = 0; t < static_cast<TileId>(n); ++t) {
    const auto i = static_cast<std::size_t>(t);
    tables.local_ok_[i] = rg.has_edge(rg.local_in(t), rg.local_out(t));
    for (Direction d : ag.dims().ports()) {
      if (d == Direction::L || !ag.neighbor(t, d)) continue;
      tables.ports_[i].push_back(d);
      tables.regions_[i].push_back(cover_rectangles(unreachable_set(rg, ag, t, d), ag.dims(), budget));
    }
  }
  return tables;
}

bool should_drop(const PortRegionTable& tables, TileId src, TileId dst) {
  if (src == dst) return !tables.local_ok(src);
  const Coord c = tables.dims().coord(dst);
  for (Direction d : tables.ports(src)) {
    const auto& rects = tables.regions(src, d);
    if (std::none_of(rects.begin(), rects.end(), [&](const Rectangle& r) { return r.contains(c); }))
      return false;
  }
  return true;
}

RegionAssignment RegionAssignment::single(std::size_t tiles) {
  RegionAssignment a;
  a.region_of.assign(tiles, 0);
  a.names = {"all"};
  a.models = {std::nullopt};
  return a;
}

RoutingSpec partition(const ArchitectureGraph& ag, const RegionAssignment& regions,
                      const TurnModel& default_model) {
  if (regions.region_of.size() != ag.tile_count())
    throw ConfigError("region assignment must label every tile");
  if (regions.models.size() != regions.names.size())
    throw ConfigError("region names and models differ in length");
  for (int r : regions.region_of)
    if (r < 0 || static_cast<std::size_t>(r) >= regions.names.size())
      throw ConfigError("region label " + std::to_string(r) + " is undefined");

  RoutingSpec spec;
  spec.model = default_model;
  spec.tile_models.resize(ag.tile_count());
  for (std::size_t t = 0; t < ag.tile_count(); ++t)
    spec.tile_models[t] = regions.models[static_cast<std::size_t>(regions.region_of[t])];
  spec.link_allowed.resize(ag.link_count());
  for (const Link& l : ag.links())
    spec.link_allowed[static_cast<std::size_t>(l.id)] =
        regions.region_of[static_cast<std::size_t>(l.src)] == regions.region_of[static_cast<std::size_t>(l.dst)];
  return spec;
}

}  // namespace ftnoc
