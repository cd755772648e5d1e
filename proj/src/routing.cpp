// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/routing.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <deque>

#include "ftnoc/error.hpp"
#include "ftnoc/rng.hpp"

namespace ftnoc {

// ---------------------------------------------------------------------------
// Turn models

namespace {

using enum Direction;

constexpr std::array<Turn, kTurnSlots3d> kSlots{{
    {N, E}, {N, W}, {S, E}, {S, W}, {E, N}, {E, S}, {W, N}, {W, S},
    {U, N}, {U, E}, {U, W}, {U, S}, {D, N}, {D, E}, {D, W}, {D, S},
    {N, U}, {N, D}, {E, U}, {E, D}, {W, U}, {W, D}, {S, U}, {S, D},
}};

std::bitset<kTurnSlots3d> slots_of(std::initializer_list<int> ids) {
  std::bitset<kTurnSlots3d> b;
  for (int i : ids) b.set(static_cast<std::size_t>(i));
  return b;
}

}  // namespace

std::span<const Turn> turn_slots(bool three_d) {
  return std::span<const Turn>(kSlots.data(), three_d ? kTurnSlots3d : kTurnSlots2d);
}

std::optional<int> turn_slot(Direction in, Direction out, bool three_d) {
  const auto slots = turn_slots(three_d);
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].in == in && slots[i].out == out) return static_cast<int>(i);
  return std::nullopt;
}

TurnModel TurnModel::xy() { return {"xy", slots_of({4, 5, 6, 7})}; }
TurnModel TurnModel::west_first() { return {"west-first", slots_of({0, 2, 4, 5, 6, 7})}; }
TurnModel TurnModel::north_last() { return {"north-last", slots_of({0, 1, 4, 5, 6, 7})}; }
TurnModel TurnModel::negative_first() { return {"negative-first", slots_of({0, 1, 2, 4, 5, 6})}; }
TurnModel TurnModel::xyz() {
  return {"xyz", slots_of({4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22, 23})};
}
TurnModel TurnModel::fully_adaptive() {
  std::bitset<kTurnSlots3d> all;
  all.set();
  return {"fully-adaptive", all};
}

TurnModel TurnModel::from_turns(std::string name, const std::vector<Turn>& turns) {
  std::bitset<kTurnSlots3d> b;
  for (const Turn& t : turns) {
    const auto slot = turn_slot(t.in, t.out, true);
    if (!slot)
      throw ConfigError(std::string("not a 90-degree turn: ") + std::string(to_string(t.in)) +
                        "-in -> " + std::string(to_string(t.out)) + "-out");
    b.set(static_cast<std::size_t>(*slot));
  }
  return {std::move(name), b};
}

std::optional<TurnModel> TurnModel::by_name(std::string_view name) {
  if (name == "xy") return xy();
  if (name == "west-first") return west_first();
  if (name == "north-last") return north_last();
  if (name == "negative-first") return negative_first();
  if (name == "xyz") return xyz();
  if (name == "fully-adaptive") return fully_adaptive();
  return std::nullopt;
}

bool TurnModel::allows(Direction in, Direction out, bool three_d) const {
  if (in == out) return false;
  if (in == Direction::L || out == Direction::L || is_straight(in, out)) return true;
  const auto slot = turn_slot(in, out, three_d);
  return slot && allows_slot(*slot);
}

// ---------------------------------------------------------------------------
// Routing graph

std::string to_string(const PortNode& n) {
  return std::to_string(n.tile) + ':' + std::string(to_string(n.dir)) +
         (n.kind == PortKind::In ? "-in" : "-out");
}

PortNode RoutingGraph::node(int id) const {
  const int per_tile = ports_ * 2;
  const int tile = id / per_tile;
  const int rem = id % per_tile;
  return PortNode{tile, dims_.ports()[static_cast<std::size_t>(rem / 2)],
                  rem % 2 == 0 ? PortKind::In : PortKind::Out};
}

int RoutingGraph::node_id(TileId tile, Direction dir, PortKind kind) const {
  const int p = dims_.port_index(dir);
  if (p < 0 || tile < 0 || tile >= dims_.tile_count()) return -1;
  return (tile * ports_ + p) * 2 + static_cast<int>(kind);
}

bool RoutingGraph::has_edge(int from, int to) const {
  const auto& s = successors(from);
  return std::binary_search(s.begin(), s.end(), to);
}

std::optional<LinkId> RoutingGraph::link_of(int out_node) const {
  const int l = out_link_[static_cast<std::size_t>(out_node)];
  if (l < 0) return std::nullopt;
  return l;
}

std::vector<std::pair<int, int>> RoutingGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t u = 0; u < succ_.size(); ++u)
    for (int v : succ_[u]) out.emplace_back(static_cast<int>(u), v);
  return out;
}

RoutingGraph build_routing_graph(const ArchitectureGraph& ag, const RoutingSpec& spec,
                                 const SystemHealthMap& shm) {
  if (!(shm.dims() == ag.dims()) || shm.link_count() != ag.link_count())
    throw DimensionMismatch("SHM does not match the architecture graph");
  if (!spec.link_allowed.empty() && spec.link_allowed.size() != ag.link_count())
    throw DimensionMismatch("link filter does not match the architecture graph");

  RoutingGraph rg;
  rg.dims_ = ag.dims();
  const auto ports = rg.dims_.ports();
  rg.ports_ = static_cast<int>(ports.size());
  const auto n = static_cast<std::size_t>(rg.dims_.tile_count() * rg.ports_ * 2);
  rg.succ_.resize(n);
  rg.pred_.resize(n);
  rg.out_link_.assign(n, -1);

  auto add = [&rg](int u, int v) {
    rg.succ_[static_cast<std::size_t>(u)].push_back(v);
    rg.pred_[static_cast<std::size_t>(v)].push_back(u);
  };

  const bool three_d = rg.dims_.three_d;
  for (TileId t = 0; t < rg.dims_.tile_count(); ++t) {
    const TurnModel& model = spec.model_for(t);
    const bool pe_ok = shm.pe(t) == Health::Healthy;
    for (Direction in : ports) {
      for (Direction out : ports) {
        bool present = false;
        if (in == Direction::L || out == Direction::L) {
          present = pe_ok;
        } else if (in == out) {
          present = false;
        } else if (is_straight(in, out)) {
          present = true;
        } else {
          const int slot = *turn_slot(in, out, three_d);
          present = model.allows_slot(slot) && shm.turn(t, slot) == Health::Healthy;
        }
        if (!present) continue;
        add(rg.node_id(t, in, PortKind::In), rg.node_id(t, out, PortKind::Out));
        ++rg.internal_;
      }
    }
  }

  for (const Link& l : ag.links()) {
    if (shm.link(l.id) != Health::Healthy) continue;
    if (!spec.link_allowed.empty() && !spec.link_allowed[static_cast<std::size_t>(l.id)]) continue;
    const int u = rg.node_id(l.src, l.src_port, PortKind::Out);
    add(u, rg.node_id(l.dst, l.dst_port, PortKind::In));
    rg.out_link_[static_cast<std::size_t>(u)] = l.id;
    ++rg.external_;
  }

  for (auto& s : rg.succ_) std::sort(s.begin(), s.end());
  for (auto& p : rg.pred_) std::sort(p.begin(), p.end());
  return rg;
}

RoutingGraph build_routing_graph(const ArchitectureGraph& ag, const TurnModel& model,
                                 const SystemHealthMap& shm) {
  RoutingSpec spec;
  spec.model = model;
  return build_routing_graph(ag, spec, shm);
}

bool is_deadlock_free(const RoutingGraph& rg) {
  const std::size_t n = rg.node_count();
  std::vector<std::size_t> indeg(n);
  for (std::size_t u = 0; u < n; ++u) indeg[u] = rg.predecessors(static_cast<int>(u)).size();
  std::vector<int> stack;
  for (std::size_t u = 0; u < n; ++u)
    if (indeg[u] == 0) stack.push_back(static_cast<int>(u));
  std::size_t removed = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++removed;
    for (int v : rg.successors(u))
      if (--indeg[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
  }
  return removed == n;
}

namespace {

// Sort key that makes DFS order lexicographic in the visited tile sequence:
// stopping at the local output beats continuing, then by next tile id.
long next_tile_key(const RoutingGraph& rg, int v) {
  const PortNode p = rg.node(v);
  if (p.kind == PortKind::In) return static_cast<long>(p.tile) * 8;
  if (p.dir == Direction::L) return -1;
  if (const auto& s = rg.successors(v); !s.empty()) return static_cast<long>(rg.node(s.front()).tile) * 8;
  return LONG_MAX - 8 + static_cast<long>(p.dir);
}

std::vector<int> ordered_successors(const RoutingGraph& rg, int u) {
  std::vector<int> s = rg.successors(u);
  std::stable_sort(s.begin(), s.end(),
                   [&](int a, int b) { return next_tile_key(rg, a) < next_tile_key(rg, b); });
  return s;
}

}  // namespace

std::vector<Path> find_paths(const RoutingGraph& rg, TileId src, TileId dst, std::size_t limit) {
  std::vector<Path> paths;
  const int start = rg.local_in(src);
  const int target = rg.local_out(dst);
  if (start < 0 || target < 0 || limit == 0) return paths;

  std::vector<bool> on_path(rg.node_count(), false);
  std::vector<int> path{start};
  on_path[static_cast<std::size_t>(start)] = true;
  // Explicit DFS stack of (node, successor list, next index).
  struct Frame {
    std::vector<int> succ;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back(Frame{ordered_successors(rg, start)});
  while (!stack.empty() && paths.size() < limit) {
    Frame& f = stack.back();
    if (f.next == f.succ.size()) {
      on_path[static_cast<std::size_t>(path.back())] = false;
      path.pop_back();
      stack.pop_back();
      continue;
    }
    const int v = f.succ[f.next++];
    if (on_path[static_cast<std::size_t>(v)]) continue;
    if (v == target) {
      Path p;
      for (int id : path) p.push_back(rg.node(id));
      p.push_back(rg.node(v));
      paths.push_back(std::move(p));
      continue;
    }
    on_path[static_cast<std::size_t>(v)] = true;
    path.push_back(v);
    stack.push_back(Frame{ordered_successors(rg, v)});
  }
  return paths;
}

std::vector<bool> reachable_from(const RoutingGraph& rg, int start) {
  std::vector<bool> seen(rg.node_count(), false);
  if (start < 0) return seen;
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : rg.successors(u))
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        stack.push_back(v);
      }
  }
  return seen;
}

std::vector<std::vector<bool>> reachability_matrix(const RoutingGraph& rg) {
  const int n = rg.dims().tile_count();
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n),
                                       std::vector<bool>(static_cast<std::size_t>(n), false));
  for (TileId s = 0; s < n; ++s) {
    const auto seen = reachable_from(rg, rg.local_in(s));
    for (TileId d = 0; d < n; ++d)
      reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)] =
          seen[static_cast<std::size_t>(rg.local_out(d))];
  }
  return reach;
}

bool is_path_in(const RoutingGraph& rg, const std::vector<int>& nodes) {
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!rg.has_edge(nodes[i - 1], nodes[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Route selection

RouteFinder::RouteFinder(std::shared_ptr<const RoutingGraph> rg, RoutePolicy policy)
    : rg_(std::move(rg)), policy_(policy) {
  const int n = rg_->dims().tile_count();
  dist_.resize(static_cast<std::size_t>(n));
  for (TileId d = 0; d < n; ++d) {
    auto& dist = dist_[static_cast<std::size_t>(d)];
    dist.assign(rg_->node_count(), -1);
    std::deque<int> queue{rg_->local_out(d)};
    dist[static_cast<std::size_t>(queue.front())] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u : rg_->predecessors(v))
        if (dist[static_cast<std::size_t>(u)] < 0) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(u);
        }
    }
  }
}

bool RouteFinder::reachable(TileId src, TileId dst) const {
  return dist_[static_cast<std::size_t>(dst)][static_cast<std::size_t>(rg_->local_in(src))] >= 0;
}

std::optional<Route> RouteFinder::route(TileId src, TileId dst, std::uint64_t flow_key) const {
  const auto& dist = dist_.at(static_cast<std::size_t>(dst));
  int cur = rg_->local_in(src);
  if (dist[static_cast<std::size_t>(cur)] < 0) return std::nullopt;
  const int target = rg_->local_out(dst);

  Route r;
  r.nodes.push_back(cur);
  std::uint64_t step_no = 0;
  while (cur != target) {
    std::vector<int> next;
    for (int v : ordered_successors(*rg_, cur))
      if (dist[static_cast<std::size_t>(v)] == dist[static_cast<std::size_t>(cur)] - 1) next.push_back(v);
    std::size_t pick = 0;
    if (policy_.choice == RouteChoice::RandomShortest && next.size() > 1) {
      const std::uint64_t h = splitmix64(policy_.seed ^ splitmix64(flow_key ^ splitmix64(step_no)));
      pick = static_cast<std::size_t>(h % next.size());
    }
    if (const auto link = rg_->link_of(cur); link && rg_->node(next[pick]).kind == PortKind::In)
      r.links.push_back(*link);
    cur = next[pick];
    r.nodes.push_back(cur);
    ++step_no;
  }
  return r;
}

}  // namespace ftnoc
