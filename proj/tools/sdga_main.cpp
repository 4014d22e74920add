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

// sdga: command-line front end.
//
//   sdga allocate --input req.json
//   sdga parse    --input rollouts.jsonl [--raw] [--s-max 5]
//   sdga select   --input rollouts.jsonl --variant phase --k 96 --seed 7
//   sdga verify   --input pool.jsonl --k 8 [--mode token]
//   sdga simulate --config sim.json --variant all --output run.csv
//
// Input defaults to stdin and output to stdout. Exit codes: 0 success,
// 1 bad input, 3 a structural optimality check failed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdga/cli.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using sdga::cli::CliError;

std::string read_all(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open input '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Buffers everything and writes the file in one go, so a failed run never
// leaves a half-written file behind.
void write_all(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot open output '" + path + "'");
  out << content;
  if (!out) throw CliError("failed writing '" + path + "'");
}

std::string with_suffix(const std::string& path, std::string_view tag) {
  fs::path p(path);
  auto stem = p.stem().string();
  return (p.parent_path() / (stem + "." + std::string(tag) +
                             p.extension().string()))
      .string();
}

struct Common {
  std::string input;
  std::string output;
  std::string variant;
  std::optional<int> k;
  int s_max = 5;
  double lambda_f = sdga::kDefaultLambdaFormat;
  std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-depth greedy trajectory allocation toolkit"};
  app.require_subcommand(1);
  Common opt;

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", opt.input, "Input file (default stdin)");
    sub->add_option("--output", opt.output, "Output file (default stdout)");
  };

  auto* allocate = app.add_subcommand("allocate", "One-shot bucket allocation");
  add_io(allocate);
  std::string alloc_variant;
  allocate->add_option("--variant", alloc_variant, "auto|phase|anti fallback");
  allocate->add_option("--k", opt.k, "Budget fallback");

  auto* parse = app.add_subcommand("parse", "Parse transcripts");
  add_io(parse);
  bool raw = false;
  parse->add_flag("--raw", raw, "Treat the input as one raw transcript");
  parse->add_option("--s-max", opt.s_max, "Maximum search depth");

  auto* select = app.add_subcommand("select", "Select, reward and normalize");
  add_io(select);
  opt.variant = "auto";
  select->add_option("--variant", opt.variant, "auto|phase|anti|random|full");
  select->add_option("--k", opt.k, "Update budget (default 96)");
  select->add_option("--s-max", opt.s_max, "Maximum search depth");
  select->add_option("--lambda-f", opt.lambda_f, "Format reward weight")
      ->check(CLI::Range(0.0, 1.0));
  select->add_option("--seed", opt.seed, "Root seed");
  int phase = 0;
  select->add_option("--phase", phase, "Starting phase for the phase variant");

  auto* verify = app.add_subcommand("verify", "Exhaustive coverage check");
  add_io(verify);
  verify->add_option("--k", opt.k, "Budget")->required();
  verify->add_option("--s-max", opt.s_max, "Maximum search depth");
  verify->add_option("--seed", opt.seed, "Root seed");
  std::string mode_name = "structural";
  verify->add_option("--mode", mode_name, "structural|token");

  auto* simulate = app.add_subcommand("simulate", "Run the dynamics simulator");
  std::string config_path;
  std::string jsonl_path;
  std::optional<int> steps;
  std::optional<int> sim_s_max;
  std::optional<double> sim_lambda;
  std::optional<std::uint64_t> sim_seed;
  std::string strategy_name = "phase";
  simulate->add_option("--config", config_path, "JSON config file");
  simulate->add_option("--output", opt.output, "CSV output (default stdout)");
  simulate->add_option("--jsonl", jsonl_path, "Also write JSONL records");
  simulate->add_option("--variant", strategy_name,
                       "auto|phase|anti|random|full|all");
  simulate->add_option("--k", opt.k, "Update budget");
  simulate->add_option("--s-max", sim_s_max, "Maximum search depth");
  simulate->add_option("--lambda-f", sim_lambda, "Format reward weight");
  simulate->add_option("--seed", sim_seed, "Root seed");
  simulate->add_option("--steps", steps, "Number of steps");

  CLI11_PARSE(app, argc, argv);

  try {
    if (allocate->parsed()) {
      json request;
      try {
        request = json::parse(read_all(opt.input));
      } catch (const json::parse_error& e) {
        throw CliError(std::string("malformed JSON: ") + e.what());
      }
      std::optional<std::string> variant;
      if (!alloc_variant.empty()) variant = alloc_variant;
      write_all(opt.output,
                sdga::cli::allocate(request, variant, opt.k).dump() + "\n");
    } else if (parse->parsed()) {
      const auto text = read_all(opt.input);
      if (raw) {
        write_all(opt.output, sdga::cli::parse_raw(text, opt.s_max).dump() + "\n");
      } else {
        std::istringstream in(text);
        std::ostringstream out;
        sdga::cli::parse_jsonl(in, out, opt.s_max);
        write_all(opt.output, out.str());
      }
    } else if (select->parsed()) {
      const auto strategy = sdga::parse_strategy(opt.variant);
      if (!strategy) throw CliError("unknown variant '" + opt.variant + "'");
      sdga::cli::SelectOptions so;
      so.strategy = *strategy;
      so.k = opt.k.value_or(sdga::cli::Defaults{}.k);
      so.s_max = opt.s_max;
      so.lambda_f = opt.lambda_f;
      so.phase = phase;
      so.seed = opt.seed;
      std::istringstream in(read_all(opt.input));
      std::ostringstream out;
      sdga::cli::select(in, out, so);
      write_all(opt.output, out.str());
    } else if (verify->parsed()) {
      const auto mode = sdga::parse_coverage_mode(mode_name);
      if (!mode) throw CliError("unknown mode '" + mode_name + "'");
      const auto report = sdga::cli::verify(read_all(opt.input), *opt.k,
                                            opt.s_max, *mode, opt.seed);
      write_all(opt.output, report.dump() + "\n");
      if (*mode == sdga::CoverageMode::Structural &&
          !report["is_optimal"].get<bool>()) {
        std::cerr << "sdga: depth-greedy selection is not coverage-optimal\n";
        return 3;
      }
    } else if (simulate->parsed()) {
      sdga::SimConfig config;
      if (!config_path.empty()) {
        json j;
        try {
          j = json::parse(read_all(config_path));
        } catch (const json::parse_error& e) {
          throw CliError(std::string("malformed config: ") + e.what());
        }
        config = sdga::sim_config_from_json(j);
      }
      if (opt.k) config.budget = *opt.k;
      if (sim_s_max) config.s_max = *sim_s_max;
      if (sim_lambda) config.lambda_f = *sim_lambda;
      if (sim_seed) config.seed = *sim_seed;
      if (steps) config.steps = *steps;
      sdga::validate(config);

      std::vector<sdga::Strategy> strategies;
      if (strategy_name == "all") {
        strategies = {sdga::Strategy::Auto, sdga::Strategy::Phase,
                      sdga::Strategy::Anti, sdga::Strategy::Random,
                      sdga::Strategy::Full};
        if (opt.output.empty() || opt.output == "-")
          throw CliError("--variant all requires --output");
      } else if (auto s = sdga::parse_strategy(strategy_name)) {
        strategies = {*s};
      } else {
        throw CliError("unknown variant '" + strategy_name + "'");
      }

      const bool csv_to_stdout = opt.output.empty() || opt.output == "-";
      std::ostream& summary = csv_to_stdout ? std::cerr : std::cout;
      for (auto strategy : strategies) {
        const auto records = sdga::run_simulation(config, strategy);
        std::ostringstream csv;
        sdga::write_csv(csv, records, config.s_max);
        const bool many = strategies.size() > 1;
        write_all(many ? with_suffix(opt.output, sdga::to_string(strategy))
                       : opt.output,
                  csv.str());
        if (!jsonl_path.empty()) {
          std::ostringstream jl;
          sdga::write_jsonl(jl, records);
          write_all(many ? with_suffix(jsonl_path, sdga::to_string(strategy))
                         : jsonl_path,
                    jl.str());
        }
        summary << sdga::to_string(strategy) << ": steps=" << records.size();
        if (!records.empty()) {
          const auto& last = records.back();
          if (last.phase) summary << " final_phase=" << *last.phase;
          summary << " mean_batch_depth=" << last.mean_batch_depth
                  << " mean_selected_depth=" << last.mean_selected_depth;
        }
        summary << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "sdga: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
