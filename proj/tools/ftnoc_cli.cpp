// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: validate, map, simulate, regions, sweep.
// Exit codes: 0 success, 1 validation failure, 2 runtime infeasibility.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ftnoc/error.hpp"
#include "ftnoc/scenario.hpp"
#include "ftnoc/simkernel.hpp"

namespace fs = std::filesystem;
using namespace ftnoc;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kInfeasible = 2;

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> heuristic;
  std::optional<std::string> cost;
  std::optional<int> regions_budget;
  bool verbose = false;
  int seeds = 8;
  int jobs = 1;
};

Scenario load(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.seed) s.seed = *o.seed;
  if (o.heuristic) s.heuristic.kind = *parse_heuristic(*o.heuristic);
  if (o.cost) s.heuristic.cost = *parse_cost_kind(*o.cost);
  if (o.regions_budget) s.region_budget = *o.regions_budget;
  if (auto err = validate_scenario(s)) throw SemanticError(*err);
  return s;
}

// Writes `name` under --out, or to stdout when no directory was given and `fallback` is set.
void emit(const Options& o, const std::string& name, const std::string& text, bool fallback) {
  if (o.out.empty()) {
    if (fallback) std::cout << text;
    return;
  }
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(o.out) / name).string());
  f << text;
}

std::string mapping_report(const Mapping& m, const Schedule& s) {
  return "mapping " + to_string(m) + "\n" + dump(s);
}

int cmd_validate(const Options& o) {
  (void)load(o);
  std::cout << "valid\n";
  return kOk;
}

int cmd_map(const Options& o) {
  const Scenario s = load(o);
  const ScenarioInstance inst(s);
  const Msu msu(inst.tg, inst.ag, inst.msu);
  const MapResult r = msu.compute(inst.shm, std::nullopt);
  emit(o, "mapping.txt", mapping_report(r.mapping, r.schedule), true);
  std::cout << "heuristic=" << to_string(s.heuristic.kind) << " cost_kind=" << to_string(s.heuristic.cost)
            << " cost=" << r.cost << " initial_cost=" << r.initial_cost << " makespan=" << r.schedule.makespan
            << " evaluations=" << r.evaluations << '\n';
  return kOk;
}

int cmd_simulate(const Options& o) {
  const Scenario s = load(o);
  const ScenarioInstance inst(s);
  const SimResult r = run(s);
  emit(o, "metrics.txt", r.metrics.summary(), true);
  emit(o, "decisions.log", join_lines(r.decisions), o.verbose);
  emit(o, "trace.txt", join_lines(r.trace), o.verbose);
  emit(o, "links.csv", r.metrics.link_table(inst.ag), false);
  emit(o, "mpm.txt", r.mpm_dump, false);
  emit(o, "mapping.txt", mapping_report(r.final_mapping, r.final_schedule), false);
  return kOk;
}

int cmd_regions(const Options& o) {
  const Scenario s = load(o);
  ScenarioInstance inst(s);
  Msu msu(inst.tg, inst.ag, inst.msu);
  std::ostringstream os;
  auto section = [&](const std::string& title) {
    const Network net = msu.network(inst.shm);
    os << "# " << title << '\n' << build_region_tables(*net.rg, inst.ag, s.region_budget).dump();
  };
  section("initial");
  for (std::size_t i = 0; i < s.injections.size(); ++i) {
    const Injection& inj = s.injections[i];
    if (inj.persistence != Persistence::Permanent) continue;
    for (const Fault& f : implicated_faults(inj.location, inst.ag)) apply_fault(inst.shm, f);
    section("after injection " + std::to_string(i) + " " + describe(inj.location) + " at t=" +
            std::to_string(inj.time));
  }
  emit(o, "regions.txt", os.str(), true);
  return kOk;
}

int cmd_sweep(const Options& o) {
  const Scenario base = load(o);
  const int n = std::max(1, o.seeds);
  std::vector<std::string> rows(static_cast<std::size_t>(n));
  std::vector<int> codes(static_cast<std::size_t>(n), kOk);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      Scenario s = base;
      s.seed = base.seed + static_cast<std::uint64_t>(i);
      std::ostringstream row;
      row << s.seed << ',';
      try {
        const Metrics m = run(s).metrics;
        row << m.makespan << ',' << (m.completed ? 1 : 0) << ',' << m.remaps << ',' << m.dropped << ','
            << m.mpm_hits << ',' << m.mpm_misses;
      } catch (const Error& e) {
        row << "error," << e.what();
        codes[static_cast<std::size_t>(i)] = kInfeasible;
      }
      rows[static_cast<std::size_t>(i)] = row.str();
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::clamp(o.jobs, 1, n); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::string csv = "seed,makespan,completed,remaps,dropped,mpm_hits,mpm_misses\n";
  for (const auto& r : rows) csv += r + '\n';
  emit(o, "sweep.csv", csv, true);
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-tolerant NoC mapping and simulation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--heuristic", o.heuristic, "Mapping heuristic")->check(CLI::IsMember({"greedy", "ils", "sa"}));
    sub->add_option("--cost", o.cost, "Cost function")->check(CLI::IsMember({"makespan", "traffic", "util"}));
    sub->add_option("--regions-budget", o.regions_budget, "Rectangles per output port")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", o.verbose, "Print logs and traces to stdout");
  };
  auto* validate = app.add_subcommand("validate", "Check a scenario");
  auto* map = app.add_subcommand("map", "Map and schedule the application");
  auto* simulate = app.add_subcommand("simulate", "Run the fault-management simulation");
  auto* regions = app.add_subcommand("regions", "Dump unreachable-region tables");
  auto* sweep = app.add_subcommand("sweep", "Simulate over consecutive seeds");
  for (auto* sub : {validate, map, simulate, regions, sweep}) common(sub);
  sweep->add_option("--seeds", o.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*map) return cmd_map(o);
    if (*simulate) return cmd_simulate(o);
    if (*regions) return cmd_regions(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const SemanticError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  }
  return kInvalid;
}
