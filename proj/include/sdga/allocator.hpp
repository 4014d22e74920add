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

// Search-depth greedy allocation.
//
// A batch is partitioned into buckets by clamped search depth s in
// {0..S_max}; bucket s holds c_s trajectories. An allocation variant proposes
// a target t_s per bucket (summing to the budget K) and a priority p_s per
// bucket (a permutation of 1..S_max+1, smaller is served first). The repair
// operator turns the targets into a feasible allocation f_s with
// 0 <= f_s <= c_s and sum f_s = min(K, sum c_s).
//
// All arrays are dense over s in {0..S_max}; empty buckets carry capacity 0.

#ifndef SDGA_ALLOCATOR_HPP
#define SDGA_ALLOCATOR_HPP

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sdga/trajectory.hpp"

namespace sdga {

struct BucketStats {
  std::vector<int> capacities;
  int s_max = 0;

  int total() const;
};

/// Target/priority pair proposed by an allocation variant.
struct PlanSpec {
  std::vector<int> targets;
  std::vector<int> priorities;
};

struct RepairResult {
  std::vector<int> feasible;
  // Set when the batch cannot cover the budget; feasible is then the full
  // capacity vector.
  bool clipped = false;
};

struct AllocationPlan {
  std::vector<int> targets;
  std::vector<int> priorities;
  std::vector<int> feasible;
  int budget = 0;
  bool clipped = false;
};

/// Curriculum threshold k in {0..S_max-1}. Never decreases.
struct PhaseState {
  int phase = 0;

  bool operator==(const PhaseState&) const = default;
};

enum class Variant { Auto, Phase, Anti };

std::string_view to_string(Variant v);
/// Accepts "auto", "phase" or "anti".
std::optional<Variant> parse_variant(std::string_view name);

BucketStats bucketize(const RolloutBatch& batch);
BucketStats bucketize(std::span<const Trajectory> trajectories, int s_max);

/// Greedy overflow repair. Buckets are visited in ascending priority value;
/// an over-target bucket is cut to capacity and its overflow is poured into
/// the buckets after it in priority order, then into the buckets before it
/// in reverse priority order.
///
/// Throws std::invalid_argument on mismatched lengths, negative entries or a
/// priority vector that is not a permutation of 1..n.
RepairResult sdga_repair(std::span<const int> capacities,
                         std::span<const int> targets,
                         std::span<const int> priorities);

// Whole budget on the deepest bucket; deeper buckets served first.
PlanSpec auto_plan(int s_max, int k_budget);

// Whole budget on bucket k+1; then k+2..S_max, then k down to 0.
PlanSpec phase_plan(int s_max, int k_budget, PhaseState state);

// Whole budget on bucket 0; shallower buckets served first.
PlanSpec anti_plan(int s_max, int k_budget);

/// Advances k -> k+1 when the buckets strictly deeper than the current
/// target (s > k+1) can supply the full budget on their own. At most one
/// advance per call; the terminal phase S_max-1 never advances.
PhaseState maybe_advance_phase(PhaseState state,
                               std::span<const int> capacities, int k_budget);

/// Builds the variant's plan and repairs it against the bucket capacities.
/// For Variant::Phase the caller is responsible for advancing the phase
/// first.
AllocationPlan allocate(const BucketStats& buckets, Variant variant,
                        int k_budget, PhaseState state = {});

}  // namespace sdga

#endif  // SDGA_ALLOCATOR_HPP
