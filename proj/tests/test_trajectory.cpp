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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>

#include "sdga/trajectory.hpp"
#include "test_support.hpp"

using namespace sdga;
using namespace sdga::testing;

TEST_CASE("qatar trace parses to four searches and the gold answer") {
  const auto text = fixture("qatar_trace.txt");
  const auto t = parse_trajectory(text, 5);
  CHECK(t.search_count == 4);
  CHECK(t.clamped_depth == 4);
  CHECK(t.format_valid);
  REQUIRE(t.extracted_answer.has_value());
  CHECK(*t.extracted_answer == "Qatar Stars League");

  // The four queries carry 10 whitespace tokens each.
  const auto ref = reference_scan(text);
  CHECK(ref.pairs == 4);
  CHECK(ref.query_tokens == 40);
  CHECK(t.retrieval_token_count == ref.query_tokens);
  CHECK(t.mean_query_tokens() == doctest::Approx(10.0));
}

TEST_CASE("prompt preamble tags are ignored") {
  const auto text = fixture("qatar_trace.txt");
  // The preamble alone mentions every tag and carries an example answer,
  // so read on its own it has two answer blocks.
  const auto preamble = text.substr(0, text.find("<|im_start|>assistant"));
  CHECK(reference_scan(preamble).answer_blocks == 2);
  CHECK_FALSE(check_format(preamble));
  CHECK(check_format(text));
}

TEST_CASE("empty transcript") {
  const auto t = parse_trajectory("", 5);
  CHECK(t.search_count == 0);
  CHECK(t.clamped_depth == 0);
  CHECK(t.retrieval_token_count == 0);
  CHECK_FALSE(t.format_valid);
  CHECK_FALSE(t.extracted_answer.has_value());
}

TEST_CASE("search counts above s_max are clamped, not rejected") {
  const auto text = make_transcript(7);
  CHECK(reference_scan(text).pairs == 7);
  const auto t = parse_trajectory(text, 5);
  CHECK(t.search_count == 7);
  CHECK(t.clamped_depth == 5);
  CHECK(t.format_valid);
}

TEST_CASE("format validity") {
  SUBCASE("well-formed") { CHECK(check_format(make_transcript(2))); }
  SUBCASE("answer only") { CHECK(check_format("<answer> x </answer>")); }
  SUBCASE("missing closing answer tag") {
    CHECK_FALSE(check_format("<think> a </think> <answer> x"));
  }
  SUBCASE("two answer blocks") {
    auto text = make_transcript(1);
    text += " <answer> x </answer>";
    CHECK(reference_scan(text).answer_blocks == 2);
    CHECK_FALSE(check_format(text));
    CHECK_FALSE(parse_trajectory(text, 5).extracted_answer.has_value());
  }
  SUBCASE("search without information") {
    CHECK_FALSE(
        check_format("<search> q </search> <think> t </think> <answer> x </answer>"));
  }
  SUBCASE("information without search") {
    CHECK_FALSE(
        check_format("<information> d </information> <answer> x </answer>"));
  }
  SUBCASE("text between search and information") {
    CHECK_FALSE(check_format(
        "<search> q </search> hm <information> d </information> <answer> x </answer>"));
  }
  SUBCASE("nested search inside think") {
    CHECK_FALSE(check_format(
        "<think> <search> q </search> </think> <answer> x </answer>"));
  }
  SUBCASE("nested identical tags") {
    CHECK_FALSE(check_format("<think> a <think> b </think> </think> <answer> x </answer>"));
  }
  SUBCASE("interleaved blocks") {
    CHECK_FALSE(check_format("<think> a <answer> b </think> </answer>"));
  }
  SUBCASE("answer must terminate") {
    CHECK_FALSE(check_format("<answer> x </answer> <think> more </think>"));
    CHECK_FALSE(check_format("<answer> x </answer> trailing words"));
    CHECK(check_format("<answer> x </answer>\n  <|im_end|>"));
  }
  SUBCASE("tags are case-sensitive") {
    CHECK_FALSE(check_format("<Answer> x </Answer>"));
  }
}

TEST_CASE("empty query or empty information does not count") {
  std::string text = "<search>   </search><information> d </information>";
  text += valid_pair("q", "\n\t ");
  text += valid_pair("real query", "docs");
  text += "<answer> a </answer>";
  const auto t = parse_trajectory(text, 5);
  CHECK(t.search_count == 1);
  CHECK(t.retrieval_token_count == 2);
}

TEST_CASE("extracted answer requires exactly one well-formed block") {
  CHECK(parse_trajectory("<answer>  spaced out  </answer>", 3).extracted_answer ==
        std::optional<std::string>("spaced out"));
  CHECK_FALSE(parse_trajectory("<answer> open only", 3).extracted_answer);
  CHECK_FALSE(parse_trajectory("<answer> a </answer><answer> b </answer>", 3)
                  .extracted_answer);
}

TEST_CASE("property: parser agrees with the reference scanner") {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto text = random_transcript(rng);
    const int s_max = 1 + static_cast<int>(rng() % 6);
    const auto t = parse_trajectory(text, s_max);
    const auto ref = reference_scan(text);
    INFO(text);
    REQUIRE(t.search_count == ref.pairs);
    REQUIRE(t.retrieval_token_count == ref.query_tokens);
    REQUIRE(t.extracted_answer.has_value() == (ref.answer_blocks == 1));
    // Clamping.
    REQUIRE(t.clamped_depth <= s_max);
    REQUIRE(t.clamped_depth <= t.search_count);
    REQUIRE(t.clamped_depth == std::min(t.search_count, s_max));
    // Tokens exist iff searches do.
    REQUIRE((t.retrieval_token_count == 0) == (t.search_count == 0));
    // Idempotence.
    const auto again = parse_trajectory(t.text, s_max);
    REQUIRE(again.search_count == t.search_count);
    REQUIRE(again.retrieval_token_count == t.retrieval_token_count);
    REQUIRE(again.extracted_answer == t.extracted_answer);
    REQUIRE(again.format_valid == t.format_valid);
  }
}

TEST_CASE("property: emptying one information block drops the count by one") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int pairs = 1 + static_cast<int>(rng() % 8);
    const int victim = static_cast<int>(rng() % pairs);
    std::string text = "<think> go </think>\n";
    std::string emptied = text;
    for (int i = 0; i < pairs; ++i) {
      const auto q = "query " + std::to_string(i);
      text += valid_pair(q, "documents");
      emptied += i == victim ? valid_pair(q, "") : valid_pair(q, "documents");
    }
    text += "<answer> a </answer>";
    emptied += "<answer> a </answer>";
    const int before = parse_trajectory(text, 10).search_count;
    const int after = parse_trajectory(emptied, 10).search_count;
    REQUIRE(before == pairs);
    REQUIRE(after == pairs - 1);
  }
}

TEST_CASE("make_batch enforces the group layout") {
  auto traj = [](std::string id, int group, int depth = 0) {
    Trajectory t;
    t.id = std::move(id);
    t.group_id = group;
    t.clamped_depth = depth;
    return t;
  };
  CHECK_NOTHROW(make_batch({traj("a", 0), traj("b", 0), traj("c", 1),
                            traj("d", 1)},
                           2, 2, 3));
  CHECK_THROWS_AS(make_batch({traj("a", 0), traj("b", 0), traj("c", 0),
                              traj("d", 1)},
                             2, 2, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_batch({traj("a", 0), traj("a", 0)}, 1, 2, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_batch({traj("a", 0), traj("b", 2)}, 1, 2, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_batch({traj("a", 0, 4), traj("b", 0)}, 1, 2, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_batch({traj("a", 0)}, 1, 2, 3), std::invalid_argument);
}

TEST_CASE("parse_trajectory rejects s_max below one") {
  CHECK_THROWS_AS(parse_trajectory("x", 0), std::invalid_argument);
}
