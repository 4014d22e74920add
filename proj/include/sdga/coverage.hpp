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

// Retrieval coverage of a selected set and an exhaustive optimality check.
//
// Coverage is the number of retrieval decision points a selection carries:
// the sum of clamped search depths (structural mode) or the sum of query
// tokens emitted in counted search blocks (token mode).

#ifndef SDGA_COVERAGE_HPP
#define SDGA_COVERAGE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "sdga/allocator.hpp"
#include "sdga/trajectory.hpp"

namespace sdga {

enum class CoverageMode { Structural, Token };

std::string_view to_string(CoverageMode m);
std::optional<CoverageMode> parse_coverage_mode(std::string_view name);

// Largest pool verify_topk_optimality() will enumerate.
inline constexpr std::size_t kMaxEnumerationPool = 24;

struct CoverageReport {
  long long selection_coverage = 0;
  long long optimal_coverage = 0;
  bool is_optimal = false;
  long long n_subsets_checked = 0;
};

struct CoverageExtremes {
  long long min_coverage = 0;
  long long max_coverage = 0;
  long long n_subsets = 0;
};

long long coverage_of(const Trajectory& t, CoverageMode mode);

long long coverage(std::span<const Trajectory> selected,
                   CoverageMode mode = CoverageMode::Structural);

/// Minimum and maximum coverage over every size-k subset of the pool, by
/// plain enumeration. Throws std::length_error when the pool exceeds
/// kMaxEnumerationPool and std::invalid_argument when k is out of range.
CoverageExtremes enumerate_coverage(std::span<const Trajectory> pool,
                                    int k_budget,
                                    CoverageMode mode = CoverageMode::Structural);

/// Coverage of the set an allocation variant would select from the pool
/// (bucketize, plan, repair, instantiate).
long long variant_coverage(std::span<const Trajectory> pool, int s_max,
                           Variant variant, int k_budget,
                           CoverageMode mode = CoverageMode::Structural,
                           std::uint64_t seed = 0);

/// Compares the depth-greedy (Auto) selection against the brute-force
/// maximum over all size-k subsets.
CoverageReport verify_topk_optimality(
    std::span<const Trajectory> pool, int k_budget, int s_max,
    CoverageMode mode = CoverageMode::Structural, std::uint64_t seed = 0);

}  // namespace sdga

#endif  // SDGA_COVERAGE_HPP
