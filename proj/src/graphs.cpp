// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/graphs.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "ftnoc/error.hpp"

namespace ftnoc {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::E: return "E";
    case Direction::W: return "W";
    case Direction::S: return "S";
    case Direction::U: return "U";
    case Direction::D: return "D";
    case Direction::L: return "L";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view s) {
  for (auto d : kPorts3d)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

std::string to_string(Coord c, bool three_d) {
  std::ostringstream os;
  os << '(' << c.x << ',' << c.y;
  if (three_d) os << ',' << c.z;
  os << ')';
  return os.str();
}

std::string to_string(const MeshDims& dims) {
  std::ostringstream os;
  os << (dims.three_d ? "mesh3d " : "mesh2d ") << dims.width << 'x' << dims.height;
  if (dims.three_d) os << 'x' << dims.depth;
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

// Returns one directed cycle among the nodes Kahn could not remove.
std::vector<int> find_cycle(std::size_t n, const std::vector<TaskEdge>& edges,
                            const std::vector<int>& indeg) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges)
    if (indeg[static_cast<std::size_t>(e.src)] > 0 && indeg[static_cast<std::size_t>(e.dst)] > 0)
      adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
  std::vector<int> color(n, 0), parent(n, -1);
  std::vector<int> cycle;
  std::function<bool(int)> dfs = [&](int u) {
    color[static_cast<std::size_t>(u)] = 1;
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (color[static_cast<std::size_t>(v)] == 1) {
        cycle.push_back(v);
        for (int w = u; w != v; w = parent[static_cast<std::size_t>(w)]) cycle.push_back(w);
        cycle.push_back(v);
        std::reverse(cycle.begin(), cycle.end());
        return true;
      }
      if (color[static_cast<std::size_t>(v)] == 0) {
        parent[static_cast<std::size_t>(v)] = u;
        if (dfs(v)) return true;
      }
    }
    color[static_cast<std::size_t>(u)] = 2;
    return false;
  };
  for (std::size_t s = 0; s < n; ++s)
    if (indeg[s] > 0 && color[s] == 0 && dfs(static_cast<int>(s))) break;
  return cycle;
}

}  // namespace

TaskGraph build_task_graph(std::vector<Task> tasks, std::vector<TaskEdge> edges) {
  const std::size_t m = tasks.size();
  if (m == 0) throw InvalidGraphError("task graph has no tasks");

  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < m; ++i) {
    const Task& t = tasks[i];
    if (i > 0 && tasks[i - 1].id == t.id)
      throw InvalidGraphError("duplicate task id " + std::to_string(t.id));
    if (t.id != static_cast<int>(i))
      throw InvalidGraphError("task ids must be 0.." + std::to_string(m - 1) + ", found " +
                              std::to_string(t.id));
    if (t.wcet <= 0) throw InvalidGraphError("task " + std::to_string(t.id) + " has wcet <= 0");
    if (t.release < 0) throw InvalidGraphError("task " + std::to_string(t.id) + " has negative release");
  }

  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    auto exists = [m](int id) { return id >= 0 && static_cast<std::size_t>(id) < m; };
    if (!exists(e.src) || !exists(e.dst))
      throw DanglingEdgeError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                              " references a missing task");
    if (e.weight <= 0)
      throw InvalidGraphError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                              " has weight <= 0");
    if (i > 0 && edges[i - 1].src == e.src && edges[i - 1].dst == e.dst)
      throw InvalidGraphError("duplicate edge " + std::to_string(e.src) + "->" + std::to_string(e.dst));
  }

  TaskGraph g;
  g.in_.resize(m);
  g.out_.resize(m);
  std::vector<int> indeg(m, 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    g.out_[static_cast<std::size_t>(edges[i].src)].push_back(static_cast<int>(i));
    g.in_[static_cast<std::size_t>(edges[i].dst)].push_back(static_cast<int>(i));
    ++indeg[static_cast<std::size_t>(edges[i].dst)];
  }
  for (auto& in : g.in_)
    std::sort(in.begin(), in.end(), [&](int a, int b) {
      return edges[static_cast<std::size_t>(a)].src < edges[static_cast<std::size_t>(b)].src;
    });

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < m; ++i)
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    g.topo_.push_back(u);
    for (int ei : g.out_[static_cast<std::size_t>(u)]) {
      const int v = edges[static_cast<std::size_t>(ei)].dst;
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  if (g.topo_.size() != m) {
    const auto cycle = find_cycle(m, edges, indeg);
    std::string msg = "task graph contains a cycle:";
    for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> t" : " t") + std::to_string(cycle[i]);
    throw CycleError(msg);
  }

  g.tasks_ = std::move(tasks);
  g.edges_ = std::move(edges);
  return g;
}

std::int64_t TaskGraph::total_edge_weight() const {
  std::int64_t total = 0;
  for (const auto& e : edges_) total += e.weight;
  return total;
}

TaskGraph random_task_graph(const RandomGraphParams& p) {
  if (p.tasks < 1) throw InvalidGraphError("random task graph needs at least one task");
  if (!(p.density >= 0.0 && p.density <= 1.0)) throw InvalidGraphError("density must be in [0, 1]");
  if (p.wcet.first < 1 || p.wcet.second < p.wcet.first) throw InvalidGraphError("bad wcet range");
  if (p.weight.first < 1 || p.weight.second < p.weight.first) throw InvalidGraphError("bad weight range");

  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<std::int64_t> wcet(p.wcet.first, p.wcet.second);
  std::uniform_int_distribution<std::int64_t> weight(p.weight.first, p.weight.second);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Task> tasks;
  for (int i = 0; i < p.tasks; ++i) {
    Task t;
    t.id = i;
    t.wcet = wcet(rng);
    tasks.push_back(t);
  }
  std::vector<TaskEdge> edges;
  for (int i = 0; i < p.tasks; ++i)
    for (int j = i + 1; j < p.tasks; ++j)
      if (coin(rng) < p.density) edges.push_back(TaskEdge{i, j, weight(rng)});
  return build_task_graph(std::move(tasks), std::move(edges));
}

// ---------------------------------------------------------------------------
// Clustering

std::int64_t ClusteredTaskGraph::inter_cluster_weight() const {
  std::int64_t total = 0;
  for (const auto& [_, w] : edges_) total += w;
  return total;
}

ClusteredTaskGraph ClusteredTaskGraph::from_assignment(const TaskGraph& tg,
                                                       const std::vector<int>& cluster_of) {
  if (cluster_of.size() != tg.size()) throw LengthMismatch("cluster assignment length != task count");
  // Renumber clusters by their smallest member.
  std::map<int, int> renumber;
  for (int c : cluster_of)
    if (!renumber.contains(c)) renumber.emplace(c, static_cast<int>(renumber.size()));
  ClusteredTaskGraph ctg;
  ctg.clusters_.resize(renumber.size());
  ctg.cluster_of_.resize(cluster_of.size());
  for (std::size_t t = 0; t < cluster_of.size(); ++t) {
    const int c = renumber.at(cluster_of[t]);
    ctg.cluster_of_[t] = c;
    ctg.clusters_[static_cast<std::size_t>(c)].push_back(static_cast<int>(t));
  }
  for (const auto& e : tg.edges()) {
    const int a = ctg.cluster_of(e.src);
    const int b = ctg.cluster_of(e.dst);
    if (a != b) ctg.edges_[{a, b}] += e.weight;
  }
  return ctg;
}

namespace {

std::vector<int> greedy_merge(const TaskGraph& tg, int k) {
  const std::size_t m = tg.size();
  std::vector<std::vector<std::int64_t>> w(m, std::vector<std::int64_t>(m, 0));
  for (const auto& e : tg.edges()) {
    w[static_cast<std::size_t>(e.src)][static_cast<std::size_t>(e.dst)] += e.weight;
    w[static_cast<std::size_t>(e.dst)][static_cast<std::size_t>(e.src)] += e.weight;
  }
  std::vector<int> cluster_of(m);
  std::iota(cluster_of.begin(), cluster_of.end(), 0);
  std::vector<bool> alive(m, true);
  for (std::size_t count = m; count > static_cast<std::size_t>(k); --count) {
    std::int64_t best = -1;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < m; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < m; ++b)
        if (alive[b] && w[a][b] > best) {
          best = w[a][b];
          ba = a;
          bb = b;
        }
    }
    // Merge bb into ba; representatives stay the smallest member.
    alive[bb] = false;
    for (std::size_t c = 0; c < m; ++c) {
      w[ba][c] += w[bb][c];
      w[c][ba] = w[ba][c];
    }
    w[ba][ba] = 0;
    for (auto& c : cluster_of)
      if (c == static_cast<int>(bb)) c = static_cast<int>(ba);
  }
  return cluster_of;
}

std::int64_t cut_weight(const TaskGraph& tg, const std::vector<int>& cluster_of) {
  std::int64_t cut = 0;
  for (const auto& e : tg.edges())
    if (cluster_of[static_cast<std::size_t>(e.src)] != cluster_of[static_cast<std::size_t>(e.dst)])
      cut += e.weight;
  return cut;
}

void local_search(const TaskGraph& tg, std::vector<int>& cluster_of, std::uint64_t seed) {
  const std::size_t m = tg.size();
  std::mt19937_64 rng(seed);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::map<int, int> sizes;
  for (int c : cluster_of) ++sizes[c];

  std::int64_t current = cut_weight(tg, cluster_of);
  for (int pass = 0; pass < 100; ++pass) {
    bool improved = false;
    std::shuffle(order.begin(), order.end(), rng);
    for (int t : order) {
      const int from = cluster_of[static_cast<std::size_t>(t)];
      if (sizes[from] == 1) continue;
      int best_cluster = from;
      std::int64_t best_cut = current;
      for (const auto& [c, _] : sizes) {
        if (c == from) continue;
        cluster_of[static_cast<std::size_t>(t)] = c;
        const std::int64_t cut = cut_weight(tg, cluster_of);
        if (cut < best_cut) {
          best_cut = cut;
          best_cluster = c;
        }
      }
      cluster_of[static_cast<std::size_t>(t)] = best_cluster;
      if (best_cluster != from) {
        --sizes[from];
        ++sizes[best_cluster];
        current = best_cut;
        improved = true;
      }
    }
    if (!improved) break;
  }
}

}  // namespace

ClusteredTaskGraph cluster_tasks(const TaskGraph& tg, int k, ClusterHeuristic heuristic,
                                 std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > tg.size())
    throw InfeasibleK("cannot form " + std::to_string(k) + " clusters from " +
                      std::to_string(tg.size()) + " tasks");
  auto cluster_of = greedy_merge(tg, k);
  if (heuristic == ClusterHeuristic::LocalSearch) local_search(tg, cluster_of, seed);
  return ClusteredTaskGraph::from_assignment(tg, cluster_of);
}

// ---------------------------------------------------------------------------
// Mesh

std::optional<LinkId> ArchitectureGraph::out_link(TileId t, Direction d) const {
  if (!has_tile(t)) return std::nullopt;
  const int l = out_[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)];
  if (l < 0) return std::nullopt;
  return l;
}

std::optional<LinkId> ArchitectureGraph::in_link(TileId t, Direction d) const {
  const auto n = neighbor(t, d);
  if (!n) return std::nullopt;
  return out_link(*n, opposite(d));
}

std::optional<TileId> ArchitectureGraph::neighbor(TileId t, Direction d) const {
  const auto l = out_link(t, d);
  if (!l) return std::nullopt;
  return link(*l).dst;
}

std::optional<LinkId> ArchitectureGraph::find_link(TileId src, TileId dst) const {
  if (!has_tile(src)) return std::nullopt;
  for (int l : out_[static_cast<std::size_t>(src)])
    if (l >= 0 && links_[static_cast<std::size_t>(l)].dst == dst) return l;
  return std::nullopt;
}

ArchitectureGraph build_mesh(int width, int height, std::optional<int> depth,
                             const std::vector<TileId>& without_pe) {
  if (width < 1 || height < 1 || (depth && *depth < 1))
    throw ZeroDimensionError("mesh dimensions must be >= 1");
  ArchitectureGraph ag;
  ag.dims_ = MeshDims{width, height, depth.value_or(1), depth.has_value()};
  const int n = ag.dims_.tile_count();
  for (TileId t = 0; t < n; ++t) ag.tiles_.push_back(Tile{t, ag.dims_.coord(t), true});
  for (TileId t : without_pe) {
    if (!ag.has_tile(t)) throw UnknownTile("tile " + std::to_string(t) + " does not exist");
    ag.tiles_[static_cast<std::size_t>(t)].pe_present = false;
  }
  ag.out_.assign(static_cast<std::size_t>(n), {-1, -1, -1, -1, -1, -1, -1});
  for (TileId t = 0; t < n; ++t) {
    for (Direction d : ag.dims_.ports()) {
      if (d == Direction::L) continue;
      const Coord c = step(ag.dims_.coord(t), d);
      if (!ag.dims_.contains(c)) continue;
      const LinkId id = static_cast<LinkId>(ag.links_.size());
      ag.links_.push_back(Link{id, t, d, ag.dims_.id(c), opposite(d)});
      ag.out_[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] = id;
    }
  }
  return ag;
}

}  // namespace ftnoc
