// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the built command-line tool end to end.

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "ftnoc/scenario.hpp"
#include "json.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace ftnoc;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch() {
  static const fs::path dir = fs::temp_directory_path() / ("ftnoc_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

Result cli(const std::string& args) {
  const fs::path out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string("'") + FTNOC_CLI + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string write_scenario(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string source(const std::string& rel) { return std::string(FTNOC_SOURCE_DIR) + "/" + rel; }

const char* kChain2x2 = R"({
  "seed": 3,
  "application": {"tasks": [{"id": 0, "wcet": 10}, {"id": 1, "wcet": 8}, {"id": 2, "wcet": 6}, {"id": 3, "wcet": 4}],
                  "edges": [{"src": 0, "dst": 1, "weight": 2}, {"src": 1, "dst": 2, "weight": 2}, {"src": 2, "dst": 3, "weight": 2}]},
  "platform": {"width": 2, "height": 2},
  "heuristic": {"kind": "greedy", "cost": "makespan"}
})";

std::string field(const std::string& text, const std::string& key) {
  const std::regex re(key + "=([^ \\n]+)");
  std::smatch m;
  return std::regex_search(text, m, re) ? m[1].str() : "";
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("validate") {
  const auto ok = cli("validate --scenario " + source("scenarios/chain_pe_fault.json"));
  CHECK(ok.code == 0);
  CHECK(ok.out == "valid\n");

  const auto cyc = cli("validate --scenario " + write_scenario("cycle.json", R"({
  "application": {"tasks": [{"id": 0, "wcet": 1}, {"id": 1, "wcet": 1}, {"id": 2, "wcet": 1}],
                  "edges": [{"src": 0, "dst": 1}, {"src": 1, "dst": 2}, {"src": 2, "dst": 0}]},
  "platform": {"width": 2, "height": 2}})"));
  CHECK(cyc.code == 1);
  CHECK(cyc.err.find("cycle") != std::string::npos);
  CHECK(cyc.err.find("/application/edges") != std::string::npos);

  const auto dec = cli("validate --scenario " + write_scenario("dec.json", R"({
  "application": {"tasks": [{"id": 0, "wcet": 1}]}, "platform": {"width": 2, "height": 2},
  "injections": [{"time": 9, "fault": {"pe": 0}}, {"time": 3, "fault": {"pe": 1}}]})"));
  CHECK(dec.code == 1);
  CHECK(dec.err.find("/injections/1/time") != std::string::npos);

  CHECK(cli("validate --scenario " + write_scenario("syntax.json", "{\"seed\": }")).code == 1);
  CHECK(cli("validate --scenario /nonexistent/file.json").code == 1);
  CHECK(cli("validate").code == 1);
  CHECK(cli("frobnicate --scenario " + source("scenarios/chain_pe_fault.json")).code == 1);
  CHECK(cli("map --heuristic tabu --scenario " + source("scenarios/chain_pe_fault.json")).code == 1);
  CHECK(cli("regions --regions-budget 0 --scenario " + source("scenarios/chain_pe_fault.json")).code == 1);
}

TEST_CASE("runtime infeasibility exits 2") {
  const auto r = cli("map --scenario " + write_scenario("nope.json", R"({
  "application": {"tasks": [{"id": 0, "wcet": 1}]},
  "platform": {"width": 2, "height": 1, "without_pe": [0, 1]}})"));
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") == 0);
}

TEST_CASE("map") {
  const auto path = write_scenario("chain.json", kChain2x2);
  const auto r = cli("map --scenario " + path);
  REQUIRE(r.code == 0);
  CHECK(!field(r.out, "makespan").empty());
  // mapping.txt lists one row per task.
  const auto out = scratch() / "map_out";
  REQUIRE(cli("map --scenario " + path + " --out " + out.string()).code == 0);
  const auto text = slurp(out / "mapping.txt");
  CHECK(text.rfind("mapping [", 0) == 0);
  CHECK(std::regex_search(text, std::regex("\n3 \\d+ \\d+ \\d+\n")));
  CHECK_FALSE(std::regex_search(text, std::regex("\n4 \\d+ \\d+ \\d+\n")));
  CHECK(text.find("\nmakespan ") != std::string::npos);

  const auto sa1 = cli("map --heuristic sa --seed 17 --scenario " + path);
  const auto sa2 = cli("map --heuristic sa --seed 17 --scenario " + path);
  CHECK(sa1.code == 0);
  CHECK(sa1.out == sa2.out);

  auto single = nlohmann::json::parse(kChain2x2);
  single["platform"] = {{"width", 1}, {"height", 1}};
  const auto one = cli("map --scenario " + write_scenario("single.json", single.dump()));
  REQUIRE(one.code == 0);
  CHECK(one.out.rfind("mapping [0,0,0,0]", 0) == 0);
  CHECK(field(one.out, "makespan") == "28");
}

TEST_CASE("simulate") {
  const auto path = write_scenario("chain.json", kChain2x2);
  const auto m = cli("map --scenario " + path);
  const auto s = cli("simulate --scenario " + path);
  REQUIRE(s.code == 0);
  CHECK(field(s.out, "makespan") == field(m.out, "makespan"));
  CHECK(field(s.out, "remaps") == "0");

  const auto out = scratch() / "sim_out";
  REQUIRE(cli("simulate --scenario " + source("scenarios/chain_pe_fault.json") + " --out " + out.string()).code == 0);
  for (const char* f : {"metrics.txt", "decisions.log", "trace.txt", "links.csv", "mpm.txt", "mapping.txt"})
    CHECK(fs::exists(out / f));
  CHECK(count(slurp(out / "decisions.log"), "action=remap") == 1);

  // Byte-identical reruns.
  const auto out2 = scratch() / "sim_out2";
  REQUIRE(cli("simulate --scenario " + source("scenarios/chain_pe_fault.json") + " --out " + out2.string()).code == 0);
  for (const char* f : {"metrics.txt", "decisions.log", "trace.txt", "links.csv", "mpm.txt", "mapping.txt"})
    CHECK(slurp(out / f) == slurp(out2 / f));
}

TEST_CASE("regions fixture is byte-identical") {
  const auto r = cli("regions --scenario " + source("tests/fixtures/broken_link.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(source("tests/fixtures/broken_link_regions.txt")));
}

TEST_CASE("regions fixture agrees with the packet-state oracle") {
  const Scenario s = load_scenario(source("tests/fixtures/broken_link.json"));
  const ScenarioInstance inst(s);
  SystemHealthMap shm = inst.shm;
  std::istringstream in(slurp(source("tests/fixtures/broken_link_regions.txt")));
  std::string line;
  std::size_t next_injection = 0;
  int sections = 0, lines = 0;
  const std::regex row(R"(tile (\d+) \(\d+,\d+\) ([NEWS]): (.*))");
  const std::regex box(R"(\[\((\d+),(\d+)\)-\((\d+),(\d+)\)\])");
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++sections;
      if (line != "# initial") {
        while (s.injections[next_injection].persistence != Persistence::Permanent) ++next_injection;
        for (const auto& f : implicated_faults(s.injections[next_injection++].location, inst.ag)) apply_fault(shm, f);
      }
      continue;
    }
    std::smatch m;
    REQUIRE(std::regex_match(line, m, row));
    ++lines;
    const TileId tile = std::stoi(m[1]);
    const Direction dir = *parse_direction(m[2].str());
    std::set<TileId> cover;
    const std::string rects = m[3];
    for (std::sregex_iterator it(rects.begin(), rects.end(), box), end; it != end; ++it)
      for (int x = std::stoi((*it)[1]); x <= std::stoi((*it)[3]); ++x)
        for (int y = std::stoi((*it)[2]); y <= std::stoi((*it)[4]); ++y) cover.insert(x + 3 * y);
    const oracle::Net net(inst.ag, shm, "xy");
    CHECK(cover == net.unreachable_from_port(tile, dir));
  }
  CHECK(sections == 3);
  CHECK(lines == 3 * 24);
}

TEST_CASE("regions budget override") {
  const auto r = cli("regions --regions-budget 1 --scenario " + source("tests/fixtures/broken_link.json"));
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("tile", 0) != 0 || line.ends_with(": -")) continue;
    CHECK(count(line, "[") == 1);
  }
}

TEST_CASE("sweep") {
  const auto path = source("scenarios/chain_pe_fault.json");
  const auto a = cli("sweep --seeds 4 --jobs 1 --scenario " + path);
  const auto b = cli("sweep --seeds 4 --jobs 3 --scenario " + path);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("seed,makespan,completed,remaps,dropped,mpm_hits,mpm_misses\n", 0) == 0);
  CHECK(count(a.out, "\n") == 5);
}
