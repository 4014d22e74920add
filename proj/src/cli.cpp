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

#include "sdga/cli.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "sdga/seed.hpp"

namespace sdga::cli {
namespace {

using nlohmann::json;

struct Record {
  int line = 0;
  std::string id;
  int group_id = 0;
  std::string text;
  std::vector<std::string> gold;
};

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw CliError("line " + std::to_string(line) + ": " + what);
}

std::vector<Record> read_records(std::istream& in, bool need_gold) {
  std::vector<Record> records;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      fail_at(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail_at(line, "expected a JSON object");
    Record r;
    r.line = line;
    if (!j.contains("id") || !j["id"].is_string())
      fail_at(line, "missing string field \"id\"");
    if (!j.contains("group_id") || !j["group_id"].is_number_integer())
      fail_at(line, "missing integer field \"group_id\"");
    if (!j.contains("text") || !j["text"].is_string())
      fail_at(line, "missing string field \"text\"");
    r.id = j["id"].get<std::string>();
    r.group_id = j["group_id"].get<int>();
    r.text = j["text"].get<std::string>();
    if (need_gold) {
      const auto& g = j.contains("gold_answers") ? j["gold_answers"] : json();
      if (g.is_string()) {
        r.gold.push_back(g.get<std::string>());
      } else if (g.is_array() && !g.empty()) {
        for (const auto& a : g) {
          if (!a.is_string()) fail_at(line, "gold_answers must hold strings");
          r.gold.push_back(a.get<std::string>());
        }
      } else {
        fail_at(line, "missing non-empty \"gold_answers\"");
      }
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw CliError("input holds no trajectories");
  return records;
}

// Infers (N, G) from the records; G is taken from the first record's group.
std::pair<int, int> group_shape(const std::vector<Record>& records) {
  std::map<int, std::pair<int, int>> groups;  // id -> (count, first line)
  for (const auto& r : records) {
    if (r.group_id < 0) fail_at(r.line, "negative group_id");
    auto [it, fresh] = groups.try_emplace(r.group_id, 0, r.line);
    ++it->second.first;
  }
  const int n = static_cast<int>(groups.size());
  const int g = groups.at(records.front().group_id).first;
  int expected_id = 0;
  for (const auto& [id, info] : groups) {
    if (id != expected_id)
      fail_at(info.second, "group ids must be contiguous from 0; group " +
                               std::to_string(expected_id) + " is missing");
    if (info.first != g)
      fail_at(info.second, "group " + std::to_string(id) + " has " +
                               std::to_string(info.first) +
                               " rollouts, expected " + std::to_string(g));
    ++expected_id;
  }
  return {n, g};
}

std::vector<Trajectory> parse_records(const std::vector<Record>& records,
                                      int s_max) {
  std::vector<Trajectory> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto t = parse_trajectory(r.text, s_max);
    t.id = r.id;
    t.group_id = r.group_id;
    out.push_back(std::move(t));
  }
  return out;
}

json trajectory_json(const Trajectory& t) {
  return {{"id", t.id},
          {"group_id", t.group_id},
          {"search_count", t.search_count},
          {"depth", t.clamped_depth},
          {"retrieval_token_count", t.retrieval_token_count},
          {"extracted_answer",
           t.extracted_answer ? json(*t.extracted_answer) : json(nullptr)},
          {"format_valid", t.format_valid}};
}

std::vector<int> int_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw CliError(std::string("missing array field \"") + key + "\"");
  std::vector<int> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw CliError(std::string("\"") + key +
                     "\" must hold non-negative integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

json allocate(const json& request, std::optional<std::string> variant_fallback,
              std::optional<int> k_fallback) {
  if (!request.is_object()) throw CliError("request must be a JSON object");
  BucketStats buckets;
  buckets.capacities = int_array(request, "capacities");
  if (buckets.capacities.size() < 2)
    throw CliError("\"capacities\" needs at least two buckets");
  buckets.s_max = static_cast<int>(buckets.capacities.size()) - 1;

  std::string variant_name;
  if (request.contains("variant") && request["variant"].is_string())
    variant_name = request["variant"].get<std::string>();
  else if (variant_fallback)
    variant_name = *variant_fallback;
  else
    throw CliError("missing string field \"variant\"");
  const auto variant = parse_variant(variant_name);
  if (!variant) throw CliError("unknown variant '" + variant_name + "'");

  int k = 0;
  if (request.contains("k") && request["k"].is_number_integer())
    k = request["k"].get<int>();
  else if (k_fallback)
    k = *k_fallback;
  else
    throw CliError("missing integer field \"k\"");
  if (k < 1) throw CliError("\"k\" must be >= 1");

  PhaseState phase;
  if (*variant == Variant::Phase) {
    if (request.contains("phase")) {
      if (!request["phase"].is_number_integer())
        throw CliError("\"phase\" must be an integer");
      phase.phase = request["phase"].get<int>();
    }
    if (phase.phase < 0 || phase.phase > buckets.s_max - 1)
      throw CliError("\"phase\" must lie in [0, " +
                     std::to_string(buckets.s_max - 1) + "]");
    phase = maybe_advance_phase(phase, buckets.capacities, k);
  }
  const auto plan = sdga::allocate(buckets, *variant, k, phase);
  json out = {{"feasible", plan.feasible}, {"clipped", plan.clipped}};
  if (*variant == Variant::Phase) out["new_phase"] = phase.phase;
  return out;
}

void select(std::istream& in, std::ostream& out, const SelectOptions& opts) {
  if (opts.k < 1) throw CliError("k must be >= 1");
  if (opts.s_max < 1) throw CliError("s_max must be >= 1");
  const auto records = read_records(in, true);
  const auto [n, g] = group_shape(records);
  RolloutBatch batch;
  try {
    batch = make_batch(parse_records(records, opts.s_max), n, g, opts.s_max);
  } catch (const std::invalid_argument& e) {
    throw CliError(e.what());
  }
  if (opts.phase < 0 || opts.phase > opts.s_max - 1)
    throw CliError("phase must lie in [0, s_max-1]");

  const auto outcome =
      select_trajectories(batch, opts.strategy, opts.k, PhaseState{opts.phase},
                          derive_seed(opts.seed, Stream::Selection, 0));
  std::unordered_map<std::string, double> rewards;
  for (auto i : outcome.selected.indices) {
    const auto& t = batch.trajectories[i];
    rewards.emplace(t.id, compute_reward(t, records[i].gold, opts.lambda_f));
  }
  const auto table = compute_advantages(batch, outcome.selected, rewards);
  std::unordered_map<std::string, double> advantage;
  for (const auto& e : table.entries) advantage.emplace(e.id, e.advantage);

  for (const auto& t : batch.trajectories) {
    json row = {{"id", t.id},
                {"group_id", t.group_id},
                {"depth", t.clamped_depth}};
    auto r = rewards.find(t.id);
    row["selected"] = r != rewards.end();
    row["reward"] = r != rewards.end() ? json(r->second) : json(nullptr);
    row["advantage"] =
        r != rewards.end() ? json(advantage.at(t.id)) : json(nullptr);
    out << row.dump() << '\n';
  }
  json summary = {{"strategy", std::string(to_string(opts.strategy))},
                  {"k", opts.k},
                  {"n_prompts", n},
                  {"rollouts_per_prompt", g},
                  {"selected", outcome.selected.size()},
                  {"clipped", outcome.clipped},
                  {"capacities", outcome.buckets.capacities},
                  {"per_bucket_draws", outcome.selected.per_bucket_draws},
                  {"excluded_groups", table.excluded_groups}};
  if (opts.strategy == Strategy::Phase) summary["phase"] = outcome.phase.phase;
  out << json{{"summary", summary}}.dump() << '\n';
}

void parse_jsonl(std::istream& in, std::ostream& out, int s_max) {
  if (s_max < 1) throw CliError("s_max must be >= 1");
  const auto records = read_records(in, false);
  for (const auto& t : parse_records(records, s_max))
    out << trajectory_json(t).dump() << '\n';
}

json parse_raw(const std::string& text, int s_max) {
  if (s_max < 1) throw CliError("s_max must be >= 1");
  auto j = trajectory_json(parse_trajectory(text, s_max));
  j.erase("id");
  j.erase("group_id");
  return j;
}

json verify(const std::string& input, int k, int s_max, CoverageMode mode,
            std::uint64_t seed) {
  std::vector<Trajectory> pool;
  const auto doc = json::parse(input, nullptr, false);
  if (!doc.is_discarded() && doc.is_object() && doc.contains("depths")) {
    if (mode != CoverageMode::Structural)
      throw CliError("a depth list only supports structural coverage");
    for (int d : int_array(doc, "depths")) {
      Trajectory t;
      t.id = "d" + std::to_string(pool.size());
      t.search_count = d;
      t.clamped_depth = std::min(d, s_max);
      pool.push_back(std::move(t));
    }
  } else {
    std::istringstream in(input);
    pool = parse_records(read_records(in, false), s_max);
  }
  if (pool.size() > kMaxEnumerationPool)
    throw CliError("pool of " + std::to_string(pool.size()) +
                   " trajectories exceeds the enumeration limit of " +
                   std::to_string(kMaxEnumerationPool));
  if (k < 1 || k > static_cast<int>(pool.size()))
    throw CliError("k must lie in [1, pool size]");

  const auto report = verify_topk_optimality(pool, k, s_max, mode, seed);
  const auto ext = enumerate_coverage(pool, k, mode);
  return {{"mode", std::string(to_string(mode))},
          {"k", k},
          {"pool_size", pool.size()},
          {"selection_coverage", report.selection_coverage},
          {"optimal_coverage", report.optimal_coverage},
          {"is_optimal", report.is_optimal},
          {"n_subsets_checked", report.n_subsets_checked},
          {"minimum_coverage", ext.min_coverage},
          {"anti_coverage", variant_coverage(pool, s_max, Variant::Anti, k,
                                             mode, seed)}};
}

}  // namespace sdga::cli
