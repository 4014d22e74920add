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

#include "sdga/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace sdga {
namespace {

enum class TagKind { Think, Search, Information, Answer };

struct Tag {
  TagKind kind;
  bool closing;
  std::size_t begin;  // position of '<'
  std::size_t end;    // one past '>'
};

struct TagSpelling {
  std::string_view text;
  TagKind kind;
  bool closing;
};

constexpr std::array<TagSpelling, 8> kTags{{
    {"<think>", TagKind::Think, false},
    {"</think>", TagKind::Think, true},
    {"<search>", TagKind::Search, false},
    {"</search>", TagKind::Search, true},
    {"<information>", TagKind::Information, false},
    {"</information>", TagKind::Information, true},
    {"<answer>", TagKind::Answer, false},
    {"</answer>", TagKind::Answer, true},
}};

constexpr std::string_view kAssistantMarker = "<|im_start|>assistant";
constexpr std::array<std::string_view, 2> kEndMarkers{"<|im_end|>",
                                                      "<|endoftext|>"};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<Tag> scan_tags(std::string_view body) {
  std::vector<Tag> tags;
  std::size_t pos = body.find('<');
  while (pos != std::string_view::npos) {
    bool matched = false;
    for (const auto& spelling : kTags) {
      if (body.compare(pos, spelling.text.size(), spelling.text) == 0) {
        tags.push_back(
            {spelling.kind, spelling.closing, pos, pos + spelling.text.size()});
        pos += spelling.text.size();
        matched = true;
        break;
      }
    }
    pos = body.find('<', matched ? pos : pos + 1);
  }
  return tags;
}

std::string_view inner(std::string_view body, const Tag& open,
                       const Tag& close) {
  return body.substr(open.end, close.begin - open.end);
}

bool forms_block(const Tag& open, const Tag& close) {
  return !open.closing && close.closing && open.kind == close.kind;
}

struct SearchScan {
  int pairs = 0;
  int query_tokens = 0;
};

// A counted pair is four consecutive tags: <search> q </search>, optional
// whitespace, <information> docs </information>, with q and docs non-blank.
SearchScan scan_search_pairs(std::string_view body,
                             const std::vector<Tag>& tags) {
  SearchScan scan;
  std::size_t i = 0;
  while (i + 3 < tags.size()) {
    const Tag& so = tags[i];
    const Tag& sc = tags[i + 1];
    const Tag& io = tags[i + 2];
    const Tag& ic = tags[i + 3];
    const bool shape = so.kind == TagKind::Search && forms_block(so, sc) &&
                       io.kind == TagKind::Information && forms_block(io, ic);
    if (shape) {
      const auto query = inner(body, so, sc);
      const auto docs = inner(body, io, ic);
      const auto gap = body.substr(sc.end, io.begin - sc.end);
      if (is_blank(gap) && !is_blank(query) && !is_blank(docs)) {
        ++scan.pairs;
        scan.query_tokens += count_tokens(query);
        i += 4;
        continue;
      }
    }
    ++i;
  }
  return scan;
}

std::optional<std::string> unique_answer(std::string_view body,
                                         const std::vector<Tag>& tags) {
  std::optional<std::string> found;
  int blocks = 0;
  for (std::size_t i = 0; i + 1 < tags.size(); ++i) {
    if (tags[i].kind == TagKind::Answer && forms_block(tags[i], tags[i + 1])) {
      ++blocks;
      found = std::string(trim(inner(body, tags[i], tags[i + 1])));
    }
  }
  if (blocks != 1) return std::nullopt;
  return found;
}

}  // namespace

int count_tokens(std::string_view s) {
  int n = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::string_view response_body(std::string_view text) {
  const auto marker = text.rfind(kAssistantMarker);
  if (marker != std::string_view::npos)
    text.remove_prefix(marker + kAssistantMarker.size());
  bool stripped = true;
  while (stripped) {
    stripped = false;
    text = trim(text);
    for (auto end_marker : kEndMarkers) {
      if (text.ends_with(end_marker)) {
        text.remove_suffix(end_marker.size());
        stripped = true;
      }
    }
  }
  return text;
}

bool check_format(std::string_view text) {
  const auto body = response_body(text);
  const auto tags = scan_tags(body);
  if (tags.size() % 2 != 0) return false;

  // Pair tags into blocks; any other arrangement is nesting or interleaving.
  std::vector<std::pair<Tag, Tag>> blocks;
  for (std::size_t i = 0; i < tags.size(); i += 2) {
    if (!forms_block(tags[i], tags[i + 1])) return false;
    blocks.emplace_back(tags[i], tags[i + 1]);
  }
  if (blocks.empty()) return false;

  int answers = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto kind = blocks[b].first.kind;
    if (kind == TagKind::Search) {
      if (b + 1 >= blocks.size()) return false;
      const auto& next = blocks[b + 1].first;
      if (next.kind != TagKind::Information) return false;
      const auto gap =
          body.substr(blocks[b].second.end, next.begin - blocks[b].second.end);
      if (!is_blank(gap)) return false;
    } else if (kind == TagKind::Information) {
      if (b == 0 || blocks[b - 1].first.kind != TagKind::Search) return false;
    } else if (kind == TagKind::Answer) {
      ++answers;
    }
  }
  const auto& last = blocks.back();
  return answers == 1 && last.first.kind == TagKind::Answer &&
         is_blank(body.substr(last.second.end));
}

Trajectory parse_trajectory(std::string_view text, int s_max) {
  if (s_max < 1) throw std::invalid_argument("s_max must be >= 1");
  const auto body = response_body(text);
  const auto tags = scan_tags(body);
  const auto scan = scan_search_pairs(body, tags);

  Trajectory t;
  t.text = std::string(text);
  t.search_count = scan.pairs;
  t.clamped_depth = std::min(scan.pairs, s_max);
  t.retrieval_token_count = scan.query_tokens;
  t.extracted_answer = unique_answer(body, tags);
  t.format_valid = check_format(text);
  return t;
}

RolloutBatch make_batch(std::vector<Trajectory> trajectories, int n_prompts,
                        int rollouts_per_prompt, int s_max) {
  if (n_prompts < 1 || rollouts_per_prompt < 1 || s_max < 1)
    throw std::invalid_argument("batch dimensions must be positive");
  const auto expected =
      static_cast<std::size_t>(n_prompts) * rollouts_per_prompt;
  if (trajectories.size() != expected)
    throw std::invalid_argument("batch holds " +
                                std::to_string(trajectories.size()) +
                                " trajectories, expected N*G = " +
                                std::to_string(expected));
  std::vector<int> per_group(n_prompts, 0);
  std::unordered_set<std::string> ids;
  for (const auto& t : trajectories) {
    if (t.group_id < 0 || t.group_id >= n_prompts)
      throw std::invalid_argument("trajectory '" + t.id + "' has group id " +
                                  std::to_string(t.group_id) +
                                  " outside [0, N)");
    if (t.clamped_depth < 0 || t.clamped_depth > s_max)
      throw std::invalid_argument("trajectory '" + t.id +
                                  "' has depth outside [0, s_max]");
    if (!ids.insert(t.id).second)
      throw std::invalid_argument("duplicate trajectory id '" + t.id + "'");
    ++per_group[t.group_id];
  }
  for (int g = 0; g < n_prompts; ++g) {
    if (per_group[g] != rollouts_per_prompt)
      throw std::invalid_argument("group " + std::to_string(g) + " has " +
                                  std::to_string(per_group[g]) +
                                  " rollouts, expected " +
                                  std::to_string(rollouts_per_prompt));
  }
  return RolloutBatch{std::move(trajectories), n_prompts, rollouts_per_prompt,
                      s_max};
}

}  // namespace sdga
