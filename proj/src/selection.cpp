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

#include "sdga/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sdga {
namespace {

std::vector<std::string> answer_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  std::istringstream in(cleaned);
  for (std::string tok; in >> tok;) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

SelectedSet collect(std::span<const Trajectory> trajectories, int s_max,
                    std::vector<std::size_t> indices, std::uint64_t seed) {
  std::sort(indices.begin(), indices.end());
  SelectedSet out;
  out.seed = seed;
  out.per_bucket_draws.assign(s_max + 1, 0);
  out.trajectory_ids.reserve(indices.size());
  for (auto i : indices) {
    out.trajectory_ids.push_back(trajectories[i].id);
    ++out.per_bucket_draws[trajectories[i].clamped_depth];
  }
  out.indices = std::move(indices);
  return out;
}

}  // namespace

SelectedSet instantiate(std::span<const Trajectory> trajectories, int s_max,
                        std::span<const int> feasible, std::uint64_t seed) {
  if (feasible.size() != static_cast<std::size_t>(s_max) + 1)
    throw std::invalid_argument("feasible allocation has " +
                                std::to_string(feasible.size()) +
                                " buckets, expected s_max+1");
  std::vector<std::vector<std::size_t>> members(s_max + 1);
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    members[std::clamp(trajectories[i].clamped_depth, 0, s_max)].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (int s = 0; s <= s_max; ++s) {
    const int want = feasible[s];
    if (want < 0 || static_cast<std::size_t>(want) > members[s].size())
      throw std::invalid_argument(
          "bucket " + std::to_string(s) + " asked for " +
          std::to_string(want) + " trajectories but holds " +
          std::to_string(members[s].size()));
    std::sample(members[s].begin(), members[s].end(),
                std::back_inserter(chosen), want, rng);
  }
  return collect(trajectories, s_max, std::move(chosen), seed);
}

SelectedSet instantiate(const RolloutBatch& batch,
                        std::span<const int> feasible, std::uint64_t seed) {
  return instantiate(batch.trajectories, batch.s_max, feasible, seed);
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (const auto& tok : answer_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto pred = answer_tokens(prediction);
  const auto ref = answer_tokens(gold);
  // Empty on either side: only an empty-vs-empty comparison scores.
  if (pred.empty() || ref.empty()) return pred.empty() && ref.empty() ? 1.0 : 0.0;

  std::map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / pred.size();
  const double recall = static_cast<double>(common) / ref.size();
  return 2.0 * precision * recall / (precision + recall);
}

double compute_reward(const Trajectory& traj,
                      std::span<const std::string> gold_answers,
                      double lambda_f) {
  if (!(lambda_f >= 0.0 && lambda_f <= 1.0))
    throw std::invalid_argument("lambda_f must lie in [0, 1]");
  if (gold_answers.empty())
    throw std::invalid_argument("at least one gold answer is required");
  double f1 = 0.0;
  if (traj.extracted_answer) {
    for (const auto& gold : gold_answers)
      f1 = std::max(f1, token_f1(*traj.extracted_answer, gold));
  }
  const double fmt = traj.format_valid ? 1.0 : 0.0;
  return f1 * (1.0 - lambda_f) + lambda_f * fmt;
}

AdvantageTable compute_advantages(
    const RolloutBatch& batch, const SelectedSet& selected,
    const std::unordered_map<std::string, double>& rewards) {
  AdvantageTable table;
  table.entries.reserve(selected.size());
  std::vector<std::vector<std::size_t>> by_group(batch.n_prompts);
  for (std::size_t e = 0; e < selected.size(); ++e) {
    const auto& traj = batch.trajectories.at(selected.indices[e]);
    auto it = rewards.find(traj.id);
    if (it == rewards.end())
      throw std::invalid_argument("no reward for selected trajectory '" +
                                  traj.id + "'");
    table.entries.push_back({traj.id, traj.group_id, it->second, 0.0});
    by_group[traj.group_id].push_back(e);
  }

  for (int g = 0; g < batch.n_prompts; ++g) {
    const auto& members = by_group[g];
    if (members.empty()) {
      table.excluded_groups.push_back(g);
      continue;
    }
    if (members.size() < 2) continue;
    double mean = 0.0;
    for (auto e : members) mean += table.entries[e].reward;
    mean /= static_cast<double>(members.size());
    double var = 0.0;
    for (auto e : members) {
      const double d = table.entries[e].reward - mean;
      var += d * d;
    }
    const double stddev = std::sqrt(var / static_cast<double>(members.size()));
    if (stddev <= kStdEpsilon) continue;
    for (auto e : members)
      table.entries[e].advantage = (table.entries[e].reward - mean) / stddev;
  }
  return table;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Auto:
      return "auto";
    case Strategy::Phase:
      return "phase";
    case Strategy::Anti:
      return "anti";
    case Strategy::Random:
      return "random";
    case Strategy::Full:
      return "full";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "auto") return Strategy::Auto;
  if (name == "phase") return Strategy::Phase;
  if (name == "anti") return Strategy::Anti;
  if (name == "random") return Strategy::Random;
  if (name == "full") return Strategy::Full;
  return std::nullopt;
}

std::optional<Variant> as_variant(Strategy s) {
  switch (s) {
    case Strategy::Auto:
      return Variant::Auto;
    case Strategy::Phase:
      return Variant::Phase;
    case Strategy::Anti:
      return Variant::Anti;
    default:
      return std::nullopt;
  }
}

SelectionOutcome select_trajectories(const RolloutBatch& batch,
                                     Strategy strategy, int k_budget,
                                     PhaseState phase, std::uint64_t seed) {
  if (k_budget < 1) throw std::invalid_argument("budget must be >= 1");
  SelectionOutcome out;
  out.buckets = bucketize(batch);
  out.phase = phase;
  const int pool = static_cast<int>(batch.size());

  if (auto variant = as_variant(strategy)) {
    if (*variant == Variant::Phase)
      out.phase = maybe_advance_phase(phase, out.buckets.capacities, k_budget);
    out.plan = allocate(out.buckets, *variant, k_budget, out.phase);
    out.clipped = out.plan->clipped;
    out.selected = instantiate(batch, out.plan->feasible, seed);
    return out;
  }

  std::vector<std::size_t> all(batch.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (strategy == Strategy::Full) {
    out.selected = collect(batch.trajectories, batch.s_max, std::move(all), seed);
    return out;
  }
  // Random: K uniformly from the whole pool.
  out.clipped = pool < k_budget;
  std::vector<std::size_t> chosen;
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen),
              std::min(k_budget, pool), rng);
  out.selected =
      collect(batch.trajectories, batch.s_max, std::move(chosen), seed);
  return out;
}

}  // namespace sdga
