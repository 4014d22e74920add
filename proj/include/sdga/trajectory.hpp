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

// Agent transcript parsing.
//
// A transcript follows the tagged agent protocol:
//
//   <think> ... </think> <search> query </search>
//   <information> retrieved documents </information>
//   ...
//   <think> ... </think> <answer> final answer </answer>
//
// Tags are exact and case-sensitive. Blocks never nest. When the transcript
// carries chat-template markers, only the text after the last
// "<|im_start|>assistant" marker is treated as the agent's response; the
// prompt preamble mentions every tag by name and would otherwise be parsed
// as blocks.

#ifndef SDGA_TRAJECTORY_HPP
#define SDGA_TRAJECTORY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdga {

struct Trajectory {
  std::string id;
  int group_id = 0;
  std::string text;
  int search_count = 0;  // before clamping
  int clamped_depth = 0;
  int retrieval_token_count = 0;
  std::optional<std::string> extracted_answer;
  bool format_valid = false;

  // Mean query length per counted retrieval call; 0 when there are none.
  double mean_query_tokens() const {
    return search_count > 0
               ? static_cast<double>(retrieval_token_count) / search_count
               : 0.0;
  }
};

/// A full set of rollouts for one training step: N prompts, G rollouts each.
/// Construct through make_batch(), which enforces the group layout.
struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  int n_prompts = 0;
  int rollouts_per_prompt = 0;
  int s_max = 0;

  std::size_t size() const { return trajectories.size(); }
};

/// Validates that every group id in {0..N-1} appears exactly G times, that
/// ids are unique and that every depth lies in {0..s_max}. Throws
/// std::invalid_argument otherwise.
RolloutBatch make_batch(std::vector<Trajectory> trajectories, int n_prompts,
                        int rollouts_per_prompt, int s_max);

/// Text the agent produced: everything after the last assistant marker, with
/// trailing end-of-turn markers removed. Returns the input unchanged when no
/// chat markers are present.
std::string_view response_body(std::string_view text);

bool check_format(std::string_view text);

/// Never fails. Malformed text parses to zero searches and an invalid
/// format flag. Requires s_max >= 1.
Trajectory parse_trajectory(std::string_view text, int s_max);

// Whitespace-delimited token count.
int count_tokens(std::string_view s);

}  // namespace sdga

#endif  // SDGA_TRAJECTORY_HPP
