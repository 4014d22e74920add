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

#include "sdga/coverage.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdga/selection.hpp"

namespace sdga {

std::string_view to_string(CoverageMode m) {
  return m == CoverageMode::Structural ? "structural" : "token";
}

std::optional<CoverageMode> parse_coverage_mode(std::string_view name) {
  if (name == "structural") return CoverageMode::Structural;
  if (name == "token") return CoverageMode::Token;
  return std::nullopt;
}

long long coverage_of(const Trajectory& t, CoverageMode mode) {
  return mode == CoverageMode::Structural ? t.clamped_depth
                                          : t.retrieval_token_count;
}

long long coverage(std::span<const Trajectory> selected, CoverageMode mode) {
  long long total = 0;
  for (const auto& t : selected) total += coverage_of(t, mode);
  return total;
}

CoverageExtremes enumerate_coverage(std::span<const Trajectory> pool,
                                    int k_budget, CoverageMode mode) {
  const int n = static_cast<int>(pool.size());
  if (pool.size() > kMaxEnumerationPool)
    throw std::length_error("pool of " + std::to_string(n) +
                            " trajectories exceeds the enumeration limit of " +
                            std::to_string(kMaxEnumerationPool));
  if (k_budget < 1 || k_budget > n)
    throw std::invalid_argument("budget must lie in [1, pool size]");

  std::vector<long long> values(n);
  for (int i = 0; i < n; ++i) values[i] = coverage_of(pool[i], mode);

  CoverageExtremes ext{std::numeric_limits<long long>::max(),
                       std::numeric_limits<long long>::min(), 0};
  // Walk every k-combination of indices in lexicographic order.
  std::vector<int> idx(k_budget);
  for (int i = 0; i < k_budget; ++i) idx[i] = i;
  while (true) {
    long long sum = 0;
    for (int i : idx) sum += values[i];
    ext.min_coverage = std::min(ext.min_coverage, sum);
    ext.max_coverage = std::max(ext.max_coverage, sum);
    ++ext.n_subsets;

    int pos = k_budget - 1;
    while (pos >= 0 && idx[pos] == n - k_budget + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < k_budget; ++i) idx[i] = idx[i - 1] + 1;
  }
  return ext;
}

long long variant_coverage(std::span<const Trajectory> pool, int s_max,
                           Variant variant, int k_budget, CoverageMode mode,
                           std::uint64_t seed) {
  const auto buckets = bucketize(pool, s_max);
  // Phase starts from its current state; callers wanting a specific phase
  // should go through allocate() directly.
  const auto plan = allocate(buckets, variant, k_budget);
  const auto picked = instantiate(pool, s_max, plan.feasible, seed);
  long long total = 0;
  for (auto i : picked.indices) total += coverage_of(pool[i], mode);
  return total;
}

CoverageReport verify_topk_optimality(std::span<const Trajectory> pool,
                                      int k_budget, int s_max,
                                      CoverageMode mode, std::uint64_t seed) {
  const auto ext = enumerate_coverage(pool, k_budget, mode);
  CoverageReport report;
  report.selection_coverage =
      variant_coverage(pool, s_max, Variant::Auto, k_budget, mode, seed);
  report.optimal_coverage = ext.max_coverage;
  report.is_optimal = report.selection_coverage == report.optimal_coverage;
  report.n_subsets_checked = ext.n_subsets;
  return report;
}

}  // namespace sdga
