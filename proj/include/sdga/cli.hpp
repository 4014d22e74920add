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

// Subcommand bodies behind the `sdga` executable. Each takes parsed options
// and streams, and throws CliError for bad input; the executable maps that
// to a diagnostic on stderr and a nonzero exit.

#ifndef SDGA_CLI_HPP
#define SDGA_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "sdga/coverage.hpp"
#include "sdga/selection.hpp"
#include "sdga/simulation.hpp"

namespace sdga::cli {

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training defaults: N=64, G=3, K=96, S_max=5, lambda_f=0.2.
struct Defaults {
  int n_prompts = 64;
  int rollouts_per_prompt = 3;
  int k = 96;
  int s_max = 5;
  double lambda_f = kDefaultLambdaFormat;
  std::uint64_t seed = 0;
};

/// {"capacities": [...], "variant": "auto"|"phase"|"anti", "k": int,
///  "phase": int?} -> {"feasible": [...], "clipped": bool, "new_phase": int?}.
/// `variant` and `k` fall back to the given values when absent from the
/// request. For the phase variant the phase is advanced (at most once)
/// before planning.
nlohmann::json allocate(const nlohmann::json& request,
                        std::optional<std::string> variant_fallback = {},
                        std::optional<int> k_fallback = {});

struct SelectOptions {
  Strategy strategy = Strategy::Auto;
  int k = 96;
  int s_max = 5;
  double lambda_f = kDefaultLambdaFormat;
  int phase = 0;
  std::uint64_t seed = 0;
};

/// Reads trajectory JSONL ({"id","group_id","text","gold_answers"}) and
/// writes one row per trajectory ({id, group_id, depth, selected, reward,
/// advantage}) followed by a {"summary": ...} line. Rewards and advantages
/// are null for trajectories that were not retained.
void select(std::istream& in, std::ostream& out, const SelectOptions& opts);

/// JSONL ({"id","group_id","text"}) -> JSONL of parsed trajectory fields.
void parse_jsonl(std::istream& in, std::ostream& out, int s_max);
/// One raw transcript -> one JSON object.
nlohmann::json parse_raw(const std::string& text, int s_max);

/// Pool given either as trajectory JSONL or as a JSON object
/// {"depths": [...]} (structural mode only). Returns the coverage report
/// extended with the brute-force minimum and the Anti selection's coverage.
nlohmann::json verify(const std::string& input, int k, int s_max,
                      CoverageMode mode, std::uint64_t seed);

}  // namespace sdga::cli

#endif  // SDGA_CLI_HPP
