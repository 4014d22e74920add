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

#ifndef SDGA_SEED_HPP
#define SDGA_SEED_HPP

#include <cstdint>
#include <initializer_list>

namespace sdga {

/// Stream labels for seed derivation. Each consumer of randomness draws from
/// its own stream so that, e.g., reward noise never perturbs depth sampling.
enum class Stream : std::uint64_t {
  BatchDepth = 1,
  Correctness = 2,
  Selection = 3,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministically derives a child seed from a root seed and a path of
/// labels (stream, step, ...).
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(root);
  for (auto label : path) h = mix64(h ^ mix64(label));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                    std::uint64_t step) {
  return derive_seed(root, {static_cast<std::uint64_t>(stream), step});
}

}  // namespace sdga

#endif  // SDGA_SEED_HPP
