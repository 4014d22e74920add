// Copyright 2026 The SDGA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdga/cli.hpp"
#include "test_support.hpp"

using json = nlohmann::json;
using namespace sdga;
using namespace sdga::testing;
namespace fs = std::filesystem;

namespace {

std::string record(const std::string& id, int group, const std::string& text,
                   const json& gold) {
  return json{{"id", id}, {"group_id", group}, {"text", text},
              {"gold_answers", gold}}
             .dump() +
         "\n";
}

std::vector<json> run_select(const std::string& input,
                             const cli::SelectOptions& opts) {
  std::istringstream in(input);
  std::ostringstream out;
  cli::select(in, out, opts);
  std::vector<json> rows;
  std::istringstream lines(out.str());
  std::string line;
  while (std::getline(lines, line)) rows.push_back(json::parse(line));
  return rows;
}

std::string two_groups() {
  std::string in;
  const int depths[6] = {0, 2, 4, 1, 3, 5};
  for (int i = 0; i < 6; ++i)
    in += record("r" + std::to_string(i), i / 3,
                 make_transcript(depths[i], "entity"), "entity");
  return in;
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / "sdga_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SDGA_CLI_PATH + "\" " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("allocate: request examples") {
  auto r = cli::allocate(json::parse(R"({"capacities":[3,2,1],"variant":"auto","k":6})"));
  CHECK(r["feasible"] == json::parse("[3,2,1]"));
  CHECK(r["clipped"] == false);
  CHECK_FALSE(r.contains("new_phase"));

  r = cli::allocate(json::parse(R"({"capacities":[0,0,0],"variant":"auto","k":5})"));
  CHECK(r["feasible"] == json::parse("[0,0,0]"));
  CHECK(r["clipped"] == true);

  r = cli::allocate(json::parse(R"({"capacities":[10,10,10],"k":4})"), "anti");
  CHECK(r["feasible"] == json::parse("[4,0,0]"));
}

TEST_CASE("allocate: phase variant advances before planning") {
  // At phase 0 with 40+ trajectories beyond bucket 1, the phase moves to 1
  // and the target lands on bucket 2.
  auto r = cli::allocate(json::parse(
      R"({"capacities":[5,5,20,20,20,20],"variant":"phase","k":30,"phase":0})"));
  CHECK(r["new_phase"] == 1);
  CHECK(r["feasible"] == json::parse("[0,0,20,10,0,0]"));

  const auto caps = json::parse("[4,9,1,7,3,12]");
  const auto terminal = cli::allocate(
      {{"capacities", caps}, {"variant", "phase"}, {"k", 20}, {"phase", 4}});
  const auto greedy =
      cli::allocate({{"capacities", caps}, {"variant", "auto"}, {"k", 20}});
  CHECK(terminal["feasible"] == greedy["feasible"]);
  CHECK(terminal["new_phase"] == 4);
}

TEST_CASE("allocate: malformed requests") {
  CHECK_THROWS_AS(cli::allocate(json::parse("[1,2]")), cli::CliError);
  CHECK_THROWS_AS(cli::allocate(json::parse(R"({"capacities":[1,2]})"), "auto"),
                  cli::CliError);
  CHECK_THROWS_AS(
      cli::allocate(json::parse(R"({"capacities":[1,-2],"variant":"auto","k":1})")),
      cli::CliError);
  CHECK_THROWS_AS(
      cli::allocate(json::parse(R"({"capacities":[1,2],"variant":"best","k":1})")),
      cli::CliError);
  CHECK_THROWS_AS(
      cli::allocate(json::parse(R"({"capacities":[1,2],"variant":"auto","k":0})")),
      cli::CliError);
  CHECK_THROWS_AS(cli::allocate(json::parse(
                      R"({"capacities":[1,2,3],"variant":"phase","k":1,"phase":2})")),
                  cli::CliError);
}

TEST_CASE("select: two groups of three with budget four") {
  cli::SelectOptions opts;
  opts.k = 4;
  opts.seed = 9;
  const auto rows = run_select(two_groups(), opts);
  REQUIRE(rows.size() == 7);
  int selected = 0;
  for (int i = 0; i < 6; ++i) {
    const auto& row = rows[i];
    CHECK(row["id"] == "r" + std::to_string(i));
    if (row["selected"].get<bool>()) {
      ++selected;
      CHECK(row["reward"].is_number());
      CHECK(row["advantage"].is_number());
    } else {
      CHECK(row["reward"].is_null());
      CHECK(row["advantage"].is_null());
    }
  }
  CHECK(selected == 4);
  const auto& summary = rows.back()["summary"];
  CHECK(summary["selected"] == 4);
  CHECK(summary["n_prompts"] == 2);
  CHECK(summary["rollouts_per_prompt"] == 3);
  CHECK(summary["clipped"] == false);
  // Depths 2..5 are the four deepest.
  for (int i : {1, 2, 4, 5}) CHECK(rows[i]["selected"] == true);

  // All retained answers are right and well-formed: rewards are 1 and the
  // zero-variance groups produce zero advantages.
  for (int i : {1, 2, 4, 5}) {
    CHECK(rows[i]["reward"].get<double>() == doctest::Approx(1.0));
    CHECK(rows[i]["advantage"].get<double>() == 0.0);
  }
}

TEST_CASE("select: output is reproducible") {
  cli::SelectOptions opts;
  opts.k = 4;
  opts.strategy = Strategy::Random;
  opts.seed = 3;
  std::istringstream a(two_groups()), b(two_groups());
  std::ostringstream oa, ob;
  cli::select(a, oa, opts);
  cli::select(b, ob, opts);
  CHECK(oa.str() == ob.str());
}

TEST_CASE("select: the deep qatar trace wins a budget of one") {
  std::string in =
      record("qatar", 0, fixture("qatar_trace.txt"), json::array({"Qatar Stars League"}));
  for (int i = 1; i < 6; ++i)
    in += record("shallow" + std::to_string(i), 0,
                 "<think> easy </think> <answer> guess </answer>", "x");
  cli::SelectOptions opts;
  opts.k = 1;
  const auto rows = run_select(in, opts);
  CHECK(rows[0]["selected"] == true);
  CHECK(rows[0]["depth"] == 4);
  CHECK(rows[0]["reward"].get<double>() == doctest::Approx(1.0));
  // A singleton retained group has zero advantage.
  CHECK(rows[0]["advantage"].get<double>() == 0.0);
  for (int i = 1; i < 6; ++i) CHECK(rows[i]["selected"] == false);
}

TEST_CASE("select: bad input carries a line number") {
  cli::SelectOptions opts;
  opts.k = 2;
  std::string in = record("a", 0, "x", "y") + record("b", 0, "x", "y") +
                   record("c", 1, "x", "y");
  try {
    std::istringstream s(in);
    std::ostringstream o;
    cli::select(s, o, opts);
    FAIL("expected an error");
  } catch (const cli::CliError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  in = record("a", 0, "x", "y") + "{not json}\n";
  try {
    std::istringstream s(in);
    std::ostringstream o;
    cli::select(s, o, opts);
    FAIL("expected an error");
  } catch (const cli::CliError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse: raw and jsonl agree") {
  const auto text = fixture("qatar_trace.txt");
  const auto raw = cli::parse_raw(text, 5);
  CHECK(raw["search_count"] == 4);
  CHECK(raw["retrieval_token_count"] == 40);
  CHECK(raw["extracted_answer"] == "Qatar Stars League");

  std::istringstream in(json{{"id", "q"}, {"group_id", 0}, {"text", text}}.dump());
  std::ostringstream out;
  cli::parse_jsonl(in, out, 5);
  const auto row = json::parse(out.str());
  CHECK(row["id"] == "q");
  CHECK(row["search_count"] == raw["search_count"]);
  CHECK(row["format_valid"] == raw["format_valid"]);
}

TEST_CASE("verify on depth lists") {
  const auto r = cli::verify(R"({"depths":[0,1,2,3,3,5]})", 3, 5,
                             CoverageMode::Structural, 0);
  CHECK(r["selection_coverage"] == 11);
  CHECK(r["optimal_coverage"] == 11);
  CHECK(r["is_optimal"] == true);
  CHECK(r["n_subsets_checked"] == 20);
  CHECK(r["minimum_coverage"] == 3);
  CHECK(r["anti_coverage"] == 3);
  CHECK_THROWS_AS(cli::verify(R"({"depths":[1,2]})", 3, 5,
                              CoverageMode::Structural, 0),
                  cli::CliError);
  CHECK_THROWS_AS(cli::verify(R"({"depths":[1,2]})", 1, 5, CoverageMode::Token, 0),
                  cli::CliError);
}

TEST_CASE("binary: allocate round trip and exit codes") {
  const auto dir = scratch_dir();
  const auto req = dir / "req.json";
  const auto out = dir / "out.json";
  std::ofstream(req) << R"({"capacities":[3,2,1],"variant":"auto","k":6})";
  REQUIRE(run("allocate --input " + req.string() + " --output " + out.string()) == 0);
  CHECK(json::parse(slurp(out))["feasible"] == json::parse("[3,2,1]"));

  std::ofstream(req, std::ios::trunc) << "{broken";
  CHECK(run("allocate --input " + req.string() + " --output " + out.string() +
            " 2>/dev/null") == 1);
}

TEST_CASE("binary: simulate all writes one csv per strategy") {
  const auto dir = scratch_dir();
  const auto cfg = dir / "sim.json";
  std::ofstream(cfg) << R"({"steps": 5, "seed": 4})";
  const auto base = dir / "run.csv";
  REQUIRE(run("simulate --config " + cfg.string() + " --variant all --output " +
              base.string() + " > /dev/null") == 0);
  for (const char* s : {"auto", "phase", "anti", "random", "full"}) {
    const auto p = dir / (std::string("run.") + s + ".csv");
    REQUIRE(fs::exists(p));
    std::istringstream lines(slurp(p));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 6);
  }
  CHECK(run("simulate --variant all > /dev/null 2>&1") == 1);
}
