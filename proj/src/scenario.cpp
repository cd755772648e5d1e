// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/scenario.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ftnoc/error.hpp"
#include "ftnoc/rng.hpp"

namespace ftnoc {

using nlohmann::json;

std::string_view to_string(Persistence p) {
  switch (p) {
    case Persistence::Transient: return "transient";
    case Persistence::Intermittent: return "intermittent";
    case Persistence::Permanent: return "permanent";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Line anchors: a SAX pass over a newline-counting iterator records the line
// on which every JSON pointer starts.

struct LineCountingIterator {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  int* line = nullptr;

  reference operator*() const { return *p; }
  LineCountingIterator& operator++() {
    if (*p == '\n') ++*line;
    ++p;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  bool operator==(const LineCountingIterator& o) const { return p == o.p; }
};

std::string escape_token(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class LineRecorder : public nlohmann::json_sax<json> {
 public:
  explicit LineRecorder(const int* line) : line_(line) {}
  std::map<std::string, int> lines;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    open(false);
    return true;
  }
  bool key(string_t& k) override {
    frames_.back().key = escape_token(k);
    lines.try_emplace(path(), *line_);
    return true;
  }
  bool end_object() override {
    close();
    return true;
  }
  bool start_array(std::size_t) override {
    open(true);
    return true;
  }
  bool end_array() override {
    close();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    bool array = false;
    std::size_t index = 0;
    std::string key;
  };

  std::string path() const {
    std::string s;
    for (const Frame& f : frames_) s += "/" + (f.array ? std::to_string(f.index) : f.key);
    return s;
  }
  // Records the current element's pointer (array slots have no key event).
  void element() {
    if (!frames_.empty() && frames_.back().array) lines.try_emplace(path(), *line_);
  }
  bool value() {
    element();
    advance();
    return true;
  }
  void open(bool array) {
    element();
    if (frames_.empty()) lines.try_emplace("", *line_);
    frames_.push_back(Frame{array, 0, {}});
  }
  void close() {
    frames_.pop_back();
    advance();
  }
  void advance() {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
  }

  const int* line_;
  std::vector<Frame> frames_;
};

// ---------------------------------------------------------------------------
// Typed reading with pointer-anchored errors.

class Reader {
 public:
  explicit Reader(std::map<std::string, int> lines) : lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    std::string where = ptr.empty() ? "/" : ptr;
    std::string p = ptr;
    for (;;) {
      if (auto it = lines_.find(p); it != lines_.end()) {
        where += " (line " + std::to_string(it->second) + ")";
        break;
      }
      if (p.empty()) break;
      p = p.substr(0, p.rfind('/'));
    }
    throw SemanticError(where + ": " + msg);
  }

  void expect_object(const json& v, const std::string& ptr, std::initializer_list<std::string_view> keys) const {
    if (!v.is_object()) fail(ptr, "expected an object");
    for (const auto& [k, _] : v.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(ptr + "/" + k, "unknown key '" + k + "'");
  }

  const json& array(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected an array");
    return v;
  }

  std::int64_t integer(const json& v, const std::string& ptr) const {
    if (v.is_number_unsigned()) {
      if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        fail(ptr, "integer out of range");
      return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer()) fail(ptr, "expected an integer");
    return v.get<std::int64_t>();
  }

  int small(const json& v, const std::string& ptr) const {
    const auto x = integer(v, ptr);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(ptr, "integer out of range");
    return static_cast<int>(x);
  }

  std::int64_t non_negative(const json& v, const std::string& ptr) const {
    const auto x = integer(v, ptr);
    if (x < 0) fail(ptr, "must be non-negative");
    return x;
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    return v.get<double>();
  }

  bool boolean(const json& v, const std::string& ptr) const {
    if (!v.is_boolean()) fail(ptr, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  Direction direction(const json& v, const std::string& ptr) const {
    const auto d = parse_direction(text(v, ptr));
    if (!d) fail(ptr, "unknown direction");
    return *d;
  }

  TurnModel turn_model(const json& v, const std::string& ptr) const {
    if (v.is_string()) {
      auto m = TurnModel::by_name(v.get<std::string>());
      if (!m) fail(ptr, "unknown turn model '" + v.get<std::string>() + "'");
      return *m;
    }
    expect_object(v, ptr, {"name", "turns"});
    std::vector<Turn> turns;
    const json list = array(v.value("turns", json::array()), ptr + "/turns");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = ptr + "/turns/" + std::to_string(i);
      const std::string s = text(list[i], at);
      const auto arrow = s.find("->");
      if (arrow == std::string::npos) fail(at, "turns are written like \"E->N\"");
      const auto in = parse_direction(s.substr(0, arrow));
      const auto out = parse_direction(s.substr(arrow + 2));
      if (!in || !out) fail(at, "unknown direction in turn '" + s + "'");
      turns.push_back(Turn{*in, *out});
    }
    try {
      return TurnModel::from_turns(v.contains("name") ? text(v["name"], ptr + "/name") : "custom", turns);
    } catch (const Error& e) {
      fail(ptr, e.what());
    }
  }

  FaultLocation location(const json& v, const std::string& ptr) const {
    if (!v.is_object() || v.size() != 1) fail(ptr, "a fault location is an object with exactly one of pe, turn, link, checker");
    const std::string kind = v.begin().key();
    const json& body = v.begin().value();
    const std::string at = ptr + "/" + kind;
    if (kind == "pe") return PeFault{small(body, at)};
    if (kind == "link") return LinkFault{small(body, at)};
    if (kind == "turn") {
      expect_object(body, at, {"tile", "slot", "in", "out"});
      if (!body.contains("tile")) fail(at, "turn needs a tile");
      const int tile = small(body["tile"], at + "/tile");
      if (body.contains("slot")) return TurnFault{tile, small(body["slot"], at + "/slot")};
      if (!body.contains("in") || !body.contains("out")) fail(at, "turn needs a slot or in/out sides");
      const Direction in = direction(body["in"], at + "/in");
      const Direction out = direction(body["out"], at + "/out");
      const auto slot = turn_slot(in, out, true);
      if (!slot) fail(at, "not a turn");
      // 2D slot numbers coincide with the first eight 3D slots.
      return TurnFault{tile, *slot};
    }
    if (kind == "checker") {
      expect_object(body, at, {"tile", "unit", "port"});
      if (!body.contains("tile") || !body.contains("unit")) fail(at, "checker needs tile and unit");
      CheckerFault c;
      c.tile = small(body["tile"], at + "/tile");
      const auto unit = parse_checker_unit(text(body["unit"], at + "/unit"));
      if (!unit) fail(at + "/unit", "unknown checker unit");
      c.unit = *unit;
      if (body.contains("port")) c.port = direction(body["port"], at + "/port");
      return c;
    }
    fail(at, "unknown fault kind '" + kind + "'");
  }

 private:
  std::map<std::string, int> lines_;
};

struct LinkByEndpoints {
  std::string ptr;
  TileId src = 0;
  TileId dst = 0;
};

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ParseError("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  int line = 1;
  LineRecorder rec(&line);
  LineCountingIterator first{text.data(), &line};
  LineCountingIterator last{text.data() + text.size(), &line};
  json::sax_parse(first, last, &rec);
  const Reader r(std::move(rec.lines));

  Scenario s;
  r.expect_object(root, "",
                  {"seed", "application", "platform", "regions", "heuristic", "classifier", "cost_model", "injections",
                   "aging"});
  if (root.contains("seed")) s.seed = static_cast<std::uint64_t>(r.non_negative(root["seed"], "/seed"));

  // Links given by endpoints are resolved once the mesh is known.
  std::vector<std::pair<FaultLocation*, LinkByEndpoints>> pending;
  auto location = [&](const json& v, const std::string& ptr, FaultLocation& out) {
    if (v.is_object() && v.size() == 1 && v.contains("link") && v["link"].is_object()) {
      const json& b = v["link"];
      r.expect_object(b, ptr + "/link", {"src", "dst"});
      if (!b.contains("src") || !b.contains("dst")) r.fail(ptr + "/link", "link needs src and dst tiles");
      pending.push_back({&out, LinkByEndpoints{ptr + "/link", r.small(b["src"], ptr + "/link/src"),
                                               r.small(b["dst"], ptr + "/link/dst")}});
      out = LinkFault{-1};
      return;
    }
    out = r.location(v, ptr);
  };

  // application
  if (!root.contains("application")) r.fail("", "missing 'application'");
  {
    const json& app = root["application"];
    const std::string base = "/application";
    r.expect_object(app, base, {"tasks", "edges", "random", "clusters", "cluster_heuristic"});
    if (app.contains("random")) {
      const json& g = app["random"];
      const std::string p = base + "/random";
      r.expect_object(g, p, {"tasks", "density", "wcet", "weight"});
      RandomGraphParams rp;
      if (!g.contains("tasks")) r.fail(p, "random graph needs 'tasks'");
      rp.tasks = r.small(g["tasks"], p + "/tasks");
      if (rp.tasks < 1) r.fail(p + "/tasks", "must be at least 1");
      if (g.contains("density")) rp.density = r.number(g["density"], p + "/density");
      if (!(rp.density >= 0.0 && rp.density <= 1.0)) r.fail(p + "/density", "must be in [0, 1]");
      auto range = [&](const char* key, std::pair<std::int64_t, std::int64_t>& out) {
        if (!g.contains(key)) return;
        const std::string at = p + "/" + key;
        const json& a = r.array(g[key], at);
        if (a.size() != 2) r.fail(at, "expected [min, max]");
        out = {r.integer(a[0], at + "/0"), r.integer(a[1], at + "/1")};
        if (out.first < 1 || out.second < out.first) r.fail(at, "need 1 <= min <= max");
      };
      range("wcet", rp.wcet);
      range("weight", rp.weight);
      s.random_graph = rp;
      if (app.contains("tasks") || app.contains("edges")) r.fail(base, "give either 'random' or 'tasks'/'edges'");
    } else {
      if (!app.contains("tasks")) r.fail(base, "missing 'tasks'");
      const json& tasks = r.array(app["tasks"], base + "/tasks");
      std::set<int> ids;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string p = base + "/tasks/" + std::to_string(i);
        const json& t = tasks[i];
        r.expect_object(t, p, {"id", "wcet", "release", "criticality", "slack"});
        Task task;
        task.id = t.contains("id") ? r.small(t["id"], p + "/id") : static_cast<int>(i);
        if (!t.contains("wcet")) r.fail(p, "task needs 'wcet'");
        task.wcet = r.integer(t["wcet"], p + "/wcet");
        if (task.wcet <= 0) r.fail(p + "/wcet", "wcet must be positive");
        if (t.contains("release")) task.release = r.non_negative(t["release"], p + "/release");
        if (t.contains("criticality")) {
          const auto c = r.text(t["criticality"], p + "/criticality");
          if (c == "critical") task.criticality = Criticality::Critical;
          else if (c == "non-critical") task.criticality = Criticality::NonCritical;
          else r.fail(p + "/criticality", "expected 'critical' or 'non-critical'");
        }
        if (t.contains("slack")) task.slack = r.non_negative(t["slack"], p + "/slack");
        if (task.id < 0 || static_cast<std::size_t>(task.id) >= tasks.size())
          r.fail(p + "/id", "task ids must be 0.." + std::to_string(tasks.size() - 1));
        if (!ids.insert(task.id).second) r.fail(p + "/id", "duplicate task id " + std::to_string(task.id));
        s.tasks.push_back(task);
      }
      if (app.contains("edges")) {
        const json& edges = r.array(app["edges"], base + "/edges");
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < edges.size(); ++i) {
          const std::string p = base + "/edges/" + std::to_string(i);
          const json& e = edges[i];
          r.expect_object(e, p, {"src", "dst", "weight"});
          if (!e.contains("src") || !e.contains("dst")) r.fail(p, "edge needs 'src' and 'dst'");
          TaskEdge edge{r.small(e["src"], p + "/src"), r.small(e["dst"], p + "/dst"), 1};
          if (e.contains("weight")) edge.weight = r.integer(e["weight"], p + "/weight");
          if (edge.weight <= 0) r.fail(p + "/weight", "weight must be positive");
          if (!ids.contains(edge.src)) r.fail(p + "/src", "unknown task " + std::to_string(edge.src));
          if (!ids.contains(edge.dst)) r.fail(p + "/dst", "unknown task " + std::to_string(edge.dst));
          if (!seen.insert({edge.src, edge.dst}).second) r.fail(p, "duplicate edge");
          s.edges.push_back(edge);
        }
      }
      try {
        (void)build_task_graph(s.tasks, s.edges);
      } catch (const CycleError& e) {
        r.fail(base + "/edges", e.what());
      } catch (const Error& e) {
        r.fail(base, e.what());
      }
    }
    if (app.contains("clusters")) s.clusters = r.small(app["clusters"], base + "/clusters");
    if (s.clusters < 0) r.fail(base + "/clusters", "must be non-negative");
    if (app.contains("cluster_heuristic")) {
      const auto h = r.text(app["cluster_heuristic"], base + "/cluster_heuristic");
      if (h == "greedy_merge") s.cluster_heuristic = ClusterHeuristic::GreedyMerge;
      else if (h == "local_search") s.cluster_heuristic = ClusterHeuristic::LocalSearch;
      else r.fail(base + "/cluster_heuristic", "expected 'greedy_merge' or 'local_search'");
    }
  }

  // platform
  if (!root.contains("platform")) r.fail("", "missing 'platform'");
  {
    const json& pf = root["platform"];
    const std::string base = "/platform";
    r.expect_object(pf, base,
                    {"width", "height", "depth", "without_pe", "turn_model", "route_choice", "region_budget", "faults",
                     "aging"});
    if (!pf.contains("width") || !pf.contains("height")) r.fail(base, "platform needs 'width' and 'height'");
    s.width = r.small(pf["width"], base + "/width");
    s.height = r.small(pf["height"], base + "/height");
    if (s.width < 1) r.fail(base + "/width", "must be at least 1");
    if (s.height < 1) r.fail(base + "/height", "must be at least 1");
    if (pf.contains("depth")) {
      s.depth = r.small(pf["depth"], base + "/depth");
      if (*s.depth < 1) r.fail(base + "/depth", "must be at least 1");
      s.turn_model = TurnModel::xyz();
    }
    const int tiles = s.width * s.height * s.depth.value_or(1);
    auto tile_in_range = [&](int t, const std::string& ptr) {
      if (t < 0 || t >= tiles) r.fail(ptr, "tile " + std::to_string(t) + " is outside the mesh");
    };
    if (pf.contains("without_pe")) {
      const json& a = r.array(pf["without_pe"], base + "/without_pe");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = base + "/without_pe/" + std::to_string(i);
        s.without_pe.push_back(r.small(a[i], p));
        tile_in_range(s.without_pe.back(), p);
      }
    }
    if (pf.contains("turn_model")) s.turn_model = r.turn_model(pf["turn_model"], base + "/turn_model");
    if (pf.contains("route_choice")) {
      const auto c = r.text(pf["route_choice"], base + "/route_choice");
      if (c == "first_shortest") s.route_choice = RouteChoice::FirstShortest;
      else if (c == "random_shortest") s.route_choice = RouteChoice::RandomShortest;
      else r.fail(base + "/route_choice", "expected 'first_shortest' or 'random_shortest'");
    }
    if (pf.contains("region_budget")) s.region_budget = r.small(pf["region_budget"], base + "/region_budget");
    if (s.region_budget < 1) r.fail(base + "/region_budget", "region budget must be at least 1");
    if (pf.contains("faults")) {
      const json& a = r.array(pf["faults"], base + "/faults");
      s.initial_faults.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) location(a[i], base + "/faults/" + std::to_string(i), s.initial_faults[i]);
    }
    if (pf.contains("aging")) {
      const json& a = r.array(pf["aging"], base + "/aging");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = base + "/aging/" + std::to_string(i);
        r.expect_object(a[i], p, {"tile", "percent"});
        if (!a[i].contains("tile") || !a[i].contains("percent")) r.fail(p, "aging needs 'tile' and 'percent'");
        AgingUpdate u{0, r.small(a[i]["tile"], p + "/tile"), r.small(a[i]["percent"], p + "/percent")};
        tile_in_range(u.tile, p + "/tile");
        if (u.percent < 0 || u.percent > 100) r.fail(p + "/percent", "must be within 0..100");
        s.initial_aging.push_back(u);
      }
    }

    // regions
    if (root.contains("regions")) {
      const json& a = r.array(root["regions"], "/regions");
      std::set<int> used;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = "/regions/" + std::to_string(i);
        r.expect_object(a[i], p, {"name", "tiles", "turn_model"});
        RegionSpec reg;
        reg.name = a[i].contains("name") ? r.text(a[i]["name"], p + "/name") : "region" + std::to_string(i);
        if (!a[i].contains("tiles")) r.fail(p, "region needs 'tiles'");
        const json& ts = r.array(a[i]["tiles"], p + "/tiles");
        for (std::size_t j = 0; j < ts.size(); ++j) {
          const std::string tp = p + "/tiles/" + std::to_string(j);
          const int t = r.small(ts[j], tp);
          tile_in_range(t, tp);
          if (!used.insert(t).second) r.fail(tp, "tile " + std::to_string(t) + " is in two regions");
          reg.tiles.push_back(t);
        }
        if (a[i].contains("turn_model")) reg.model = r.turn_model(a[i]["turn_model"], p + "/turn_model");
        s.regions.push_back(std::move(reg));
      }
    }
  }

  if (root.contains("heuristic")) {
    const json& h = root["heuristic"];
    const std::string base = "/heuristic";
    r.expect_object(h, base, {"kind", "cost", "ils_iterations", "initial", "sa"});
    if (h.contains("kind")) {
      const auto k = parse_heuristic(r.text(h["kind"], base + "/kind"));
      if (!k) r.fail(base + "/kind", "expected greedy, ils or sa");
      s.heuristic.kind = *k;
    }
    if (h.contains("cost")) {
      const auto c = parse_cost_kind(r.text(h["cost"], base + "/cost"));
      if (!c) r.fail(base + "/cost", "expected makespan, traffic or util");
      s.heuristic.cost = *c;
    }
    if (h.contains("ils_iterations")) s.heuristic.ils_iterations = r.small(h["ils_iterations"], base + "/ils_iterations");
    if (s.heuristic.ils_iterations < 1) r.fail(base + "/ils_iterations", "must be at least 1");
    if (h.contains("initial")) {
      const auto i = r.text(h["initial"], base + "/initial");
      if (i == "first_fit") s.heuristic.initial = InitialPolicy::FirstFit;
      else if (i == "random") s.heuristic.initial = InitialPolicy::Random;
      else r.fail(base + "/initial", "expected 'first_fit' or 'random'");
    }
    if (h.contains("sa")) {
      const json& sa = h["sa"];
      const std::string p = base + "/sa";
      r.expect_object(sa, p, {"t0", "alpha", "moves_per_temperature", "t_min_ratio"});
      if (sa.contains("t0")) s.heuristic.sa.t0 = r.number(sa["t0"], p + "/t0");
      if (sa.contains("alpha")) s.heuristic.sa.alpha = r.number(sa["alpha"], p + "/alpha");
      if (sa.contains("moves_per_temperature"))
        s.heuristic.sa.moves_per_temperature = r.small(sa["moves_per_temperature"], p + "/moves_per_temperature");
      if (sa.contains("t_min_ratio")) s.heuristic.sa.t_min_ratio = r.number(sa["t_min_ratio"], p + "/t_min_ratio");
      if (s.heuristic.sa.t0 && *s.heuristic.sa.t0 < 0) r.fail(p + "/t0", "must be non-negative");
      if (!(s.heuristic.sa.alpha > 0 && s.heuristic.sa.alpha < 1)) r.fail(p + "/alpha", "must be in (0, 1)");
      if (s.heuristic.sa.moves_per_temperature < 1) r.fail(p + "/moves_per_temperature", "must be at least 1");
      if (!(s.heuristic.sa.t_min_ratio > 0 && s.heuristic.sa.t_min_ratio < 1))
        r.fail(p + "/t_min_ratio", "must be in (0, 1)");
    }
  }

  if (root.contains("classifier")) {
    const json& c = root["classifier"];
    const std::string base = "/classifier";
    r.expect_object(c, base, {"window", "intermittent_threshold", "permanent_threshold", "mpfs_size", "mpm_capacity"});
    if (c.contains("window")) s.classifier.window = r.integer(c["window"], base + "/window");
    if (c.contains("intermittent_threshold"))
      s.classifier.intermittent_threshold = r.small(c["intermittent_threshold"], base + "/intermittent_threshold");
    if (c.contains("permanent_threshold"))
      s.classifier.permanent_threshold = r.small(c["permanent_threshold"], base + "/permanent_threshold");
    if (c.contains("mpfs_size")) s.mpfs_size = static_cast<int>(r.non_negative(c["mpfs_size"], base + "/mpfs_size"));
    if (c.contains("mpm_capacity"))
      s.mpm_capacity = static_cast<std::size_t>(r.non_negative(c["mpm_capacity"], base + "/mpm_capacity"));
    try {
      s.classifier.validate();
    } catch (const Error& e) {
      r.fail(base, e.what());
    }
  }

  if (root.contains("cost_model")) {
    const json& c = root["cost_model"];
    const std::string base = "/cost_model";
    r.expect_object(c, base,
                    {"link_cycles", "router_delay", "cycles_per_evaluation", "cycles_per_task", "t_fetch", "t_par_ext",
                     "t_par_map", "t_par_map_per_move", "detection_latency", "drop_in_flight"});
    auto field = [&](const char* key, std::int64_t& out) {
      if (c.contains(key)) out = r.non_negative(c[key], base + "/" + key);
    };
    field("link_cycles", s.comm.link_cycles);
    field("router_delay", s.comm.router_delay);
    field("cycles_per_evaluation", s.costs.cycles_per_evaluation);
    field("cycles_per_task", s.costs.cycles_per_task);
    field("t_fetch", s.costs.t_fetch);
    field("t_par_ext", s.costs.t_par_ext);
    field("t_par_map", s.costs.t_par_map);
    field("t_par_map_per_move", s.costs.t_par_map_per_move);
    field("detection_latency", s.detection_latency);
    if (s.comm.link_cycles < 1) r.fail(base + "/link_cycles", "must be at least 1");
    if (c.contains("drop_in_flight")) s.drop_in_flight = r.boolean(c["drop_in_flight"], base + "/drop_in_flight");
  }

  if (root.contains("injections")) {
    const json& a = r.array(root["injections"], "/injections");
    s.injections.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/injections/" + std::to_string(i);
      const json& v = a[i];
      r.expect_object(v, p, {"time", "fault", "persistence", "count", "spacing", "stuck"});
      Injection& inj = s.injections[i];
      if (!v.contains("time") || !v.contains("fault")) r.fail(p, "injection needs 'time' and 'fault'");
      inj.time = r.non_negative(v["time"], p + "/time");
      if (i > 0 && inj.time < s.injections[i - 1].time)
        r.fail(p + "/time", "injection times must be non-decreasing (" + std::to_string(inj.time) + " after " +
                                std::to_string(s.injections[i - 1].time) + ")");
      location(v["fault"], p + "/fault", inj.location);
      if (v.contains("persistence")) {
        const auto k = r.text(v["persistence"], p + "/persistence");
        if (k == "transient") inj.persistence = Persistence::Transient;
        else if (k == "intermittent") inj.persistence = Persistence::Intermittent;
        else if (k == "permanent") inj.persistence = Persistence::Permanent;
        else r.fail(p + "/persistence", "expected transient, intermittent or permanent");
      }
      if (v.contains("count")) inj.count = r.small(v["count"], p + "/count");
      if (v.contains("spacing")) inj.spacing = r.non_negative(v["spacing"], p + "/spacing");
      if (inj.count < 1) r.fail(p + "/count", "must be at least 1");
      if (v.contains("stuck")) {
        const auto st = r.text(v["stuck"], p + "/stuck");
        if (st == "SA0") inj.stuck = StuckType::SA0;
        else if (st == "SA1") inj.stuck = StuckType::SA1;
        else r.fail(p + "/stuck", "expected SA0 or SA1");
      }
    }
  }

  if (root.contains("aging")) {
    const json& a = r.array(root["aging"], "/aging");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/aging/" + std::to_string(i);
      r.expect_object(a[i], p, {"time", "tile", "percent"});
      if (!a[i].contains("time") || !a[i].contains("tile") || !a[i].contains("percent"))
        r.fail(p, "aging needs 'time', 'tile' and 'percent'");
      AgingUpdate u{r.non_negative(a[i]["time"], p + "/time"), r.small(a[i]["tile"], p + "/tile"),
                    r.small(a[i]["percent"], p + "/percent")};
      if (u.percent < 0 || u.percent > 100) r.fail(p + "/percent", "must be within 0..100");
      if (!s.aging.empty() && u.time < s.aging.back().time) r.fail(p + "/time", "aging times must be non-decreasing");
      s.aging.push_back(u);
    }
  }

  // Mesh-dependent checks, anchored to the offending entry.
  ArchitectureGraph ag;
  try {
    ag = build_mesh(s.width, s.height, s.depth, s.without_pe);
  } catch (const Error& e) {
    r.fail("/platform", e.what());
  }
  for (auto& [loc, link] : pending) {
    const auto id = ag.has_tile(link.src) ? ag.find_link(link.src, link.dst) : std::nullopt;
    if (!id) r.fail(link.ptr, "no link from tile " + std::to_string(link.src) + " to " + std::to_string(link.dst));
    *loc = LinkFault{*id};
  }
  auto check_target = [&](const FaultLocation& loc, const std::string& ptr) {
    try {
      (void)implicated_faults(loc, ag);
    } catch (const Error& e) {
      r.fail(ptr, e.what());
    }
  };
  for (std::size_t i = 0; i < s.initial_faults.size(); ++i)
    check_target(s.initial_faults[i], "/platform/faults/" + std::to_string(i));
  for (std::size_t i = 0; i < s.injections.size(); ++i)
    check_target(s.injections[i].location, "/injections/" + std::to_string(i) + "/fault");
  for (std::size_t i = 0; i < s.aging.size(); ++i)
    if (!ag.has_tile(s.aging[i].tile)) r.fail("/aging/" + std::to_string(i) + "/tile", "tile outside the mesh");
  const int tasks = s.random_graph ? s.random_graph->tasks : static_cast<int>(s.tasks.size());
  if (s.clusters > tasks) r.fail("/application/clusters", "more clusters than tasks");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

// ---------------------------------------------------------------------------

namespace {

template <class F>
auto semantic(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const SemanticError&) {
    throw;
  } catch (const Error& e) {
    throw SemanticError(where + ": " + e.what());
  }
}

TaskGraph make_tg(const Scenario& s) {
  return semantic("/application", [&] {
    if (s.random_graph) {
      RandomGraphParams p = *s.random_graph;
      p.seed = substream(s.seed, "application");
      return random_task_graph(p);
    }
    return build_task_graph(s.tasks, s.edges);
  });
}

ArchitectureGraph make_ag(const Scenario& s) {
  return semantic("/platform", [&] { return build_mesh(s.width, s.height, s.depth, s.without_pe); });
}

}  // namespace

ScenarioInstance::ScenarioInstance(const Scenario& s) : tg(make_tg(s)), ag(make_ag(s)), shm(ag) {
  semantic("/platform", [&] {
    for (const FaultLocation& loc : s.initial_faults)
      for (const Fault& f : implicated_faults(loc, ag)) apply_fault(shm, f);
    for (const AgingUpdate& u : s.initial_aging) set_aging(shm, u.tile, u.percent);
    if (s.region_budget < 1) throw ConfigError("region budget must be at least 1");
  });
  semantic("/classifier", [&] { s.classifier.validate(); });
  for (std::size_t i = 0; i < s.injections.size(); ++i) {
    const auto& inj = s.injections[i];
    const std::string at = "/injections/" + std::to_string(i);
    if (i > 0 && inj.time < s.injections[i - 1].time) throw SemanticError(at + "/time: injection times must be non-decreasing");
    if (inj.count < 1 || inj.spacing < 0) throw SemanticError(at + ": bad burst shape");
    semantic(at + "/fault", [&] { (void)implicated_faults(inj.location, ag); });
  }
  for (std::size_t i = 0; i < s.aging.size(); ++i) {
    const auto& u = s.aging[i];
    const std::string at = "/aging/" + std::to_string(i);
    if (i > 0 && u.time < s.aging[i - 1].time) throw SemanticError(at + "/time: aging times must be non-decreasing");
    if (!ag.has_tile(u.tile) || u.percent < 0 || u.percent > 100) throw SemanticError(at + ": bad aging update");
  }
  if (s.detection_latency < 0) throw SemanticError("/cost_model/detection_latency: must be non-negative");
  if (s.mpfs_size < 0) throw SemanticError("/classifier/mpfs_size: must be non-negative");

  std::vector<int> groups;
  if (s.clusters > 0) {
    ctg = semantic("/application/clusters",
                   [&] { return cluster_tasks(tg, s.clusters, s.cluster_heuristic, substream(s.seed, "cluster")); });
    groups = ctg->assignment();
  }

  RoutingSpec routing;
  routing.model = s.turn_model;
  if (!s.regions.empty()) {
    RegionAssignment ra;
    ra.region_of.assign(ag.tile_count(), static_cast<int>(s.regions.size()));
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
      ra.names.push_back(s.regions[r].name);
      ra.models.push_back(s.regions[r].model);
      for (TileId t : s.regions[r].tiles) {
        if (!ag.has_tile(t)) throw SemanticError("/regions/" + std::to_string(r) + ": tile outside the mesh");
        ra.region_of[static_cast<std::size_t>(t)] = static_cast<int>(r);
      }
    }
    ra.names.push_back("default");
    ra.models.push_back(std::nullopt);
    routing = semantic("/regions", [&] { return partition(ag, ra, s.turn_model); });
  }

  msu.routing = std::move(routing);
  msu.route_policy = RoutePolicy{s.route_choice, substream(s.seed, "routing")};
  msu.heuristic = s.heuristic;
  msu.comm = s.comm;
  msu.costs = s.costs;
  msu.groups = std::move(groups);
  msu.mpm_capacity = s.mpm_capacity;
  msu.seed = s.seed;

  shmu.classifier = s.classifier;
  shmu.mpfs_size = s.mpfs_size;
  shmu.region_budget = s.region_budget;
}

std::optional<std::string> validate_scenario(const Scenario& s) {
  try {
    ScenarioInstance inst(s);
  } catch (const Error& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

}  // namespace ftnoc
