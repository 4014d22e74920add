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

// Trajectory-level selection, rewards and subset-restricted advantages.
//
// Selection never looks at rewards. Rewards are computed afterwards for the
// retained set only, and advantages are normalized within each prompt group
// using the retained members of that group alone. Groups with no retained
// member are reported as excluded.

#ifndef SDGA_SELECTION_HPP
#define SDGA_SELECTION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdga/allocator.hpp"
#include "sdga/trajectory.hpp"

namespace sdga {

inline constexpr double kDefaultLambdaFormat = 0.2;
// Standard deviations at or below this are treated as zero variance.
inline constexpr double kStdEpsilon = 1e-6;

struct SelectedSet {
  std::vector<std::size_t> indices;  // positions in the source batch, sorted
  std::vector<std::string> trajectory_ids;
  std::vector<int> per_bucket_draws;
  std::uint64_t seed = 0;

  std::size_t size() const { return indices.size(); }
};

struct AdvantageEntry {
  std::string id;
  int group_id = 0;
  double reward = 0.0;
  double advantage = 0.0;
};

struct AdvantageTable {
  std::vector<AdvantageEntry> entries;  // same order as the selected set
  std::vector<int> excluded_groups;
};

/// Uniform sampling without replacement of feasible[s] members from each
/// bucket. Throws std::invalid_argument when feasible does not match the
/// bucket layout or asks for more members than a bucket holds.
SelectedSet instantiate(std::span<const Trajectory> trajectories, int s_max,
                        std::span<const int> feasible, std::uint64_t seed);
SelectedSet instantiate(const RolloutBatch& batch,
                        std::span<const int> feasible, std::uint64_t seed);

/// Lowercase, drop ASCII punctuation and the articles a/an/the, collapse
/// whitespace.
std::string normalize_answer(std::string_view text);

/// Bag-of-tokens F1 between normalized prediction and normalized gold.
double token_f1(std::string_view prediction, std::string_view gold);

/// F1 * (1 - lambda_f) + lambda_f * format, with F1 the best match over the
/// gold aliases and 0 when no answer was extracted.
double compute_reward(const Trajectory& traj,
                      std::span<const std::string> gold_answers,
                      double lambda_f = kDefaultLambdaFormat);

/// Group-normalized advantages over the retained set: (r - mean) / std with
/// population std. Singleton and zero-variance groups get exactly 0.
/// `rewards` maps trajectory id to reward and must cover every selected id.
AdvantageTable compute_advantages(
    const RolloutBatch& batch, const SelectedSet& selected,
    const std::unordered_map<std::string, double>& rewards);

/// Selection strategies: the three allocation variants plus the two
/// baselines (uniform random K, and the full pool).
enum class Strategy { Auto, Phase, Anti, Random, Full };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
std::optional<Variant> as_variant(Strategy s);

struct SelectionOutcome {
  BucketStats buckets;
  std::optional<AllocationPlan> plan;  // allocation variants only
  SelectedSet selected;
  PhaseState phase;  // after this step's advancement check
  bool clipped = false;
};

/// Selection stage of one training step: bucketize, advance the phase
/// (Phase strategy only), plan, repair and instantiate. The result depends
/// only on the batch's depths, the strategy, the budget, the phase and the
/// seed.
SelectionOutcome select_trajectories(const RolloutBatch& batch,
                                     Strategy strategy, int k_budget,
                                     PhaseState phase, std::uint64_t seed);

}  // namespace sdga

#endif  // SDGA_SELECTION_HPP
