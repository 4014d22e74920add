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

// Synthetic training-dynamics simulator.
//
// No model is trained. Each step draws N*G rollouts whose search depths are
// Binomial(S_max, p_t) with p_t = sigmoid(a + b*t + coupling*feedback), writes
// a tagged transcript per rollout, and runs the full selection pipeline on it
// (parse, bucketize, plan, repair, instantiate, reward, advantage). The
// feedback term is the previous step's selected-minus-batch mean depth, a
// crude stand-in for a policy drifting toward what it is trained on; with
// coupling = 0 the depth stream is open-loop and identical for every
// strategy under the same seed.

#ifndef SDGA_SIMULATION_HPP
#define SDGA_SIMULATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdga/selection.hpp"
#include "sdga/trajectory.hpp"

namespace sdga {

struct DepthSchedule {
  enum class Family { Logistic, Constant };
  Family family = Family::Logistic;
  // Logistic: logit(p_t) = intercept + slope * t.
  double intercept = -1.5;
  double slope = 0.03;
  // Constant: p_t = probability.
  double probability = 0.5;
};

/// P(correct) = clamp(base + gain * depth + noise * z, 0, 1), z ~ N(0, 1).
struct RewardModel {
  double base_accuracy = 0.2;
  double depth_gain = 0.12;
  double noise = 0.1;
};

struct SimConfig {
  int n_prompts = 64;
  int rollouts_per_prompt = 3;
  int budget = 96;
  int s_max = 5;
  int steps = 200;
  DepthSchedule schedule;
  RewardModel reward;
  double lambda_f = kDefaultLambdaFormat;
  double coupling = 0.0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument describing the first bad field.
void validate(const SimConfig& config);

/// Depth success probability at `step` given the previous step's feedback.
double depth_probability(const SimConfig& config, int step, double feedback);

/// Open-loop mean depth S_max * p_t. Non-decreasing in t when slope >= 0.
double expected_batch_depth(const SimConfig& config, int step);

/// Transcript with exactly `depth` counted search/information pairs and a
/// final answer block. Query lengths vary with the call index.
std::string synthetic_transcript(int group_id, int depth,
                                 std::string_view answer);

std::string gold_answer(int group_id);

struct SimBatch {
  RolloutBatch batch;
  std::vector<std::string> gold;  // one answer per group
};

SimBatch sample_batch(const SimConfig& config, int step, double feedback);

struct StepRecord {
  int step = 0;
  std::vector<int> depth_histogram;
  std::optional<int> phase;  // Phase strategy only
  double mean_selected_depth = 0.0;
  double mean_batch_depth = 0.0;
  double mean_reward_selected = 0.0;
  bool clipped = false;
  int n_selected = 0;
  int n_excluded_groups = 0;
  std::uint64_t selection_digest = 0;  // FNV-1a over selected ids

  bool operator==(const StepRecord&) const = default;
};

std::vector<StepRecord> run_simulation(const SimConfig& config,
                                       Strategy strategy);

/// Columns: step, phase, h0..hS, mean_batch_depth, mean_selected_depth,
/// mean_reward_selected, clipped. The phase cell is empty for strategies
/// without a phase.
void write_csv(std::ostream& out, std::span<const StepRecord> records,
               int s_max);
void write_jsonl(std::ostream& out, std::span<const StepRecord> records);

/// Missing keys keep their defaults. Unknown schedule families and
/// mistyped values throw std::invalid_argument.
SimConfig sim_config_from_json(const nlohmann::json& j,
                               SimConfig base = SimConfig{});
nlohmann::json to_json(const SimConfig& config);

}  // namespace sdga

#endif  // SDGA_SIMULATION_HPP
