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

#include "sdga/allocator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sdga {
namespace {

void require_plan_args(int s_max, int k_budget) {
  if (s_max < 1) throw std::invalid_argument("s_max must be >= 1");
  if (k_budget < 0) throw std::invalid_argument("budget must be >= 0");
}

std::vector<int> single_target(int s_max, int bucket, int k_budget) {
  std::vector<int> targets(s_max + 1, 0);
  targets[bucket] = k_budget;
  return targets;
}

// Bucket indices sorted by priority value (highest priority first).
std::vector<int> priority_order(std::span<const int> priorities) {
  const int n = static_cast<int>(priorities.size());
  std::vector<int> order(n, -1);
  for (int s = 0; s < n; ++s) {
    const int p = priorities[s];
    if (p < 1 || p > n || order[p - 1] != -1)
      throw std::invalid_argument("priorities must be a permutation of 1.." +
                                  std::to_string(n));
    order[p - 1] = s;
  }
  return order;
}

}  // namespace

int BucketStats::total() const {
  return std::accumulate(capacities.begin(), capacities.end(), 0);
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Auto:
      return "auto";
    case Variant::Phase:
      return "phase";
    case Variant::Anti:
      return "anti";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "auto") return Variant::Auto;
  if (name == "phase") return Variant::Phase;
  if (name == "anti") return Variant::Anti;
  return std::nullopt;
}

BucketStats bucketize(std::span<const Trajectory> trajectories, int s_max) {
  if (s_max < 1) throw std::invalid_argument("s_max must be >= 1");
  BucketStats stats{std::vector<int>(s_max + 1, 0), s_max};
  for (const auto& t : trajectories)
    ++stats.capacities[std::clamp(t.clamped_depth, 0, s_max)];
  return stats;
}

BucketStats bucketize(const RolloutBatch& batch) {
  return bucketize(batch.trajectories, batch.s_max);
}

RepairResult sdga_repair(std::span<const int> capacities,
                         std::span<const int> targets,
                         std::span<const int> priorities) {
  const std::size_t n = capacities.size();
  if (n == 0 || targets.size() != n || priorities.size() != n)
    throw std::invalid_argument(
        "capacities, targets and priorities must share a non-zero length");
  auto negative = [](int x) { return x < 0; };
  if (std::any_of(capacities.begin(), capacities.end(), negative) ||
      std::any_of(targets.begin(), targets.end(), negative))
    throw std::invalid_argument("capacities and targets must be >= 0");
  const auto order = priority_order(priorities);

  const long long budget =
      std::accumulate(targets.begin(), targets.end(), 0LL);
  const long long supply =
      std::accumulate(capacities.begin(), capacities.end(), 0LL);
  if (supply < budget)
    return {std::vector<int>(capacities.begin(), capacities.end()), true};

  std::vector<int> f(targets.begin(), targets.end());
  auto pour = [&](int r, int& overflow) {
    const int spare = capacities[r] - f[r];
    if (spare > 0) {
      const int delta = std::min(spare, overflow);
      f[r] += delta;
      overflow -= delta;
    }
  };

  for (std::size_t rank = 0; rank < n; ++rank) {
    const int s = order[rank];
    if (f[s] <= capacities[s]) continue;
    int overflow = f[s] - capacities[s];
    f[s] = capacities[s];
    for (std::size_t later = rank + 1; later < n && overflow > 0; ++later)
      pour(order[later], overflow);
    for (std::size_t earlier = rank; earlier-- > 0 && overflow > 0;)
      pour(order[earlier], overflow);
  }
  return {std::move(f), false};
}

PlanSpec auto_plan(int s_max, int k_budget) {
  require_plan_args(s_max, k_budget);
  PlanSpec plan{single_target(s_max, s_max, k_budget),
                std::vector<int>(s_max + 1)};
  for (int s = 0; s <= s_max; ++s) plan.priorities[s] = s_max - s + 1;
  return plan;
}

PlanSpec phase_plan(int s_max, int k_budget, PhaseState state) {
  require_plan_args(s_max, k_budget);
  const int k = state.phase;
  if (k < 0 || k > s_max - 1)
    throw std::invalid_argument("phase must lie in [0, s_max-1]");
  PlanSpec plan{single_target(s_max, k + 1, k_budget),
                std::vector<int>(s_max + 1)};
  for (int s = 0; s <= s_max; ++s)
    plan.priorities[s] = s >= k + 1 ? s - k : s_max + 1 - s;
  return plan;
}

PlanSpec anti_plan(int s_max, int k_budget) {
  require_plan_args(s_max, k_budget);
  PlanSpec plan{single_target(s_max, 0, k_budget),
                std::vector<int>(s_max + 1)};
  for (int s = 0; s <= s_max; ++s) plan.priorities[s] = s + 1;
  return plan;
}

PhaseState maybe_advance_phase(PhaseState state,
                               std::span<const int> capacities, int k_budget) {
  const int s_max = static_cast<int>(capacities.size()) - 1;
  if (s_max < 1 || state.phase < 0 || state.phase > s_max - 1)
    throw std::invalid_argument("phase must lie in [0, s_max-1]");
  if (state.phase == s_max - 1) return state;
  long long deeper = 0;
  for (int s = state.phase + 2; s <= s_max; ++s) deeper += capacities[s];
  if (deeper >= k_budget) ++state.phase;
  return state;
}

AllocationPlan allocate(const BucketStats& buckets, Variant variant,
                        int k_budget, PhaseState state) {
  PlanSpec spec;
  switch (variant) {
    case Variant::Auto:
      spec = auto_plan(buckets.s_max, k_budget);
      break;
    case Variant::Phase:
      spec = phase_plan(buckets.s_max, k_budget, state);
      break;
    case Variant::Anti:
      spec = anti_plan(buckets.s_max, k_budget);
      break;
  }
  auto repaired = sdga_repair(buckets.capacities, spec.targets,
                              spec.priorities);
  return AllocationPlan{std::move(spec.targets), std::move(spec.priorities),
                        std::move(repaired.feasible), k_budget,
                        repaired.clipped};
}

}  // namespace sdga
