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

#include "sdga/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "sdga/seed.hpp"

namespace sdga {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid simulation config: " + what);
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void validate(const SimConfig& c) {
  require(c.n_prompts >= 1, "n_prompts must be >= 1");
  require(c.rollouts_per_prompt >= 1, "rollouts_per_prompt must be >= 1");
  require(c.budget >= 1, "budget must be >= 1");
  require(c.s_max >= 1, "s_max must be >= 1");
  require(c.steps >= 0, "steps must be >= 0");
  require(std::isfinite(c.coupling) && c.coupling >= 0.0,
          "coupling must be finite and >= 0");
  require(c.lambda_f >= 0.0 && c.lambda_f <= 1.0, "lambda_f must lie in [0, 1]");
  const auto& s = c.schedule;
  if (s.family == DepthSchedule::Family::Logistic) {
    require(std::isfinite(s.intercept) && std::isfinite(s.slope),
            "logistic schedule parameters must be finite");
  } else {
    require(s.probability >= 0.0 && s.probability <= 1.0,
            "constant schedule probability must lie in [0, 1]");
  }
  const auto& r = c.reward;
  require(std::isfinite(r.base_accuracy) && std::isfinite(r.depth_gain),
          "reward model parameters must be finite");
  require(std::isfinite(r.noise) && r.noise >= 0.0,
          "reward noise must be finite and >= 0");
}

double depth_probability(const SimConfig& config, int step, double feedback) {
  const auto& s = config.schedule;
  if (s.family == DepthSchedule::Family::Constant) {
    if (config.coupling == 0.0) return s.probability;
    const double p = std::clamp(s.probability, 1e-12, 1.0 - 1e-12);
    return sigmoid(std::log(p / (1.0 - p)) + config.coupling * feedback);
  }
  return sigmoid(s.intercept + s.slope * step + config.coupling * feedback);
}

double expected_batch_depth(const SimConfig& config, int step) {
  return config.s_max * depth_probability(config, step, 0.0);
}

std::string gold_answer(int group_id) {
  return "entity " + std::to_string(group_id);
}

std::string synthetic_transcript(int group_id, int depth,
                                 std::string_view answer) {
  const auto g = std::to_string(group_id);
  std::string text = "<think> I need to work out question " + g + ". </think>\n";
  for (int call = 0; call < depth; ++call) {
    const auto c = std::to_string(call);
    text += "<search> facts about entity " + g;
    for (int extra = 0; extra < call % 3; ++extra) text += " detail";
    text += " </search>\n<information> Doc 1: evidence " + c +
            " for question " + g + ". </information>\n<think> Noted evidence " +
            c + ". </think>\n";
  }
  text += "<answer> ";
  text += answer;
  text += " </answer>";
  return text;
}

SimBatch sample_batch(const SimConfig& config, int step, double feedback) {
  const double p = depth_probability(config, step, feedback);
  std::mt19937_64 depth_rng(derive_seed(config.seed, Stream::BatchDepth, step));
  std::mt19937_64 answer_rng(
      derive_seed(config.seed, Stream::Correctness, step));
  std::binomial_distribution<int> depth_dist(config.s_max, p);
  std::normal_distribution<double> z_dist(0.0, 1.0);
  std::uniform_real_distribution<double> u_dist(0.0, 1.0);

  SimBatch out;
  out.gold.reserve(config.n_prompts);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(static_cast<std::size_t>(config.n_prompts) *
                       config.rollouts_per_prompt);
  const auto& rm = config.reward;
  for (int i = 0; i < config.n_prompts; ++i) {
    out.gold.push_back(gold_answer(i));
    for (int g = 0; g < config.rollouts_per_prompt; ++g) {
      const int depth = depth_dist(depth_rng);
      const double z = z_dist(answer_rng);
      const double u = u_dist(answer_rng);
      const double p_correct = std::clamp(
          rm.base_accuracy + rm.depth_gain * depth + rm.noise * z, 0.0, 1.0);
      const bool correct = u < p_correct;
      auto traj = parse_trajectory(
          synthetic_transcript(i, depth, correct ? out.gold.back() : "unknown"),
          config.s_max);
      traj.id = "t" + std::to_string(step) + "-p" + std::to_string(i) + "-r" +
                std::to_string(g);
      traj.group_id = i;
      trajectories.push_back(std::move(traj));
    }
  }
  out.batch = make_batch(std::move(trajectories), config.n_prompts,
                         config.rollouts_per_prompt, config.s_max);
  return out;
}

std::vector<StepRecord> run_simulation(const SimConfig& config,
                                       Strategy strategy) {
  validate(config);
  std::vector<StepRecord> records;
  records.reserve(config.steps);
  PhaseState phase;
  double feedback = 0.0;
  for (int step = 0; step < config.steps; ++step) {
    // Phase 1: rollouts.
    const auto sim = sample_batch(config, step, feedback);
    const auto& batch = sim.batch;

    // Phase 2: parse (done at intake), bucketize, select.
    const auto outcome = select_trajectories(
        batch, strategy, config.budget, phase,
        derive_seed(config.seed, Stream::Selection, step));
    phase = outcome.phase;

    // Phase 3: rewards and advantages on the retained set.
    std::unordered_map<std::string, double> rewards;
    double reward_sum = 0.0;
    double depth_sum = 0.0;
    std::uint64_t digest = kFnvOffset;
    for (auto i : outcome.selected.indices) {
      const auto& t = batch.trajectories[i];
      const std::string& gold = sim.gold[t.group_id];
      const double r =
          compute_reward(t, std::span<const std::string>(&gold, 1),
                         config.lambda_f);
      rewards.emplace(t.id, r);
      reward_sum += r;
      depth_sum += t.clamped_depth;
      digest = fnv1a(digest, t.id);
      digest = fnv1a(digest, "\n");
    }
    const auto advantages = compute_advantages(batch, outcome.selected, rewards);

    StepRecord rec;
    rec.step = step;
    rec.depth_histogram = outcome.buckets.capacities;
    if (strategy == Strategy::Phase) rec.phase = phase.phase;
    const double n_sel = static_cast<double>(outcome.selected.size());
    rec.n_selected = static_cast<int>(outcome.selected.size());
    rec.mean_selected_depth = n_sel > 0 ? depth_sum / n_sel : 0.0;
    rec.mean_reward_selected = n_sel > 0 ? reward_sum / n_sel : 0.0;
    double batch_depth = 0.0;
    for (int s = 0; s <= config.s_max; ++s)
      batch_depth += static_cast<double>(s) * rec.depth_histogram[s];
    rec.mean_batch_depth = batch_depth / static_cast<double>(batch.size());
    rec.clipped = outcome.clipped;
    rec.n_excluded_groups = static_cast<int>(advantages.excluded_groups.size());
    rec.selection_digest = digest;
    records.push_back(std::move(rec));

    feedback = records.back().mean_selected_depth -
               records.back().mean_batch_depth;
  }
  return records;
}

void write_csv(std::ostream& out, std::span<const StepRecord> records,
               int s_max) {
  out << "step,phase";
  for (int s = 0; s <= s_max; ++s) out << ",h" << s;
  out << ",mean_batch_depth,mean_selected_depth,mean_reward_selected,clipped\n";
  for (const auto& r : records) {
    out << r.step << ',';
    if (r.phase) out << *r.phase;
    for (int h : r.depth_histogram) out << ',' << h;
    out << ',' << fixed(r.mean_batch_depth) << ','
        << fixed(r.mean_selected_depth) << ','
        << fixed(r.mean_reward_selected) << ',' << (r.clipped ? 1 : 0) << '\n';
  }
}

void write_jsonl(std::ostream& out, std::span<const StepRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["step"] = r.step;
    j["phase"] = r.phase ? nlohmann::json(*r.phase) : nlohmann::json(nullptr);
    j["depth_histogram"] = r.depth_histogram;
    j["mean_batch_depth"] = r.mean_batch_depth;
    j["mean_selected_depth"] = r.mean_selected_depth;
    j["mean_reward_selected"] = r.mean_reward_selected;
    j["clipped"] = r.clipped;
    j["n_selected"] = r.n_selected;
    j["n_excluded_groups"] = r.n_excluded_groups;
    out << j.dump() << '\n';
  }
}

SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  try {
    auto take = [&](const nlohmann::json& obj, const char* key, auto& field) {
      if (obj.contains(key)) obj.at(key).get_to(field);
    };
    take(j, "n_prompts", c.n_prompts);
    take(j, "rollouts_per_prompt", c.rollouts_per_prompt);
    take(j, "budget", c.budget);
    take(j, "s_max", c.s_max);
    take(j, "steps", c.steps);
    take(j, "lambda_f", c.lambda_f);
    take(j, "coupling", c.coupling);
    take(j, "seed", c.seed);
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      if (s.contains("family")) {
        const auto family = s.at("family").get<std::string>();
        if (family == "logistic")
          c.schedule.family = DepthSchedule::Family::Logistic;
        else if (family == "constant")
          c.schedule.family = DepthSchedule::Family::Constant;
        else
          throw std::invalid_argument("unknown schedule family '" + family +
                                      "'");
      }
      take(s, "intercept", c.schedule.intercept);
      take(s, "slope", c.schedule.slope);
      take(s, "probability", c.schedule.probability);
    }
    if (j.contains("reward_model")) {
      const auto& r = j.at("reward_model");
      take(r, "base_accuracy", c.reward.base_accuracy);
      take(r, "depth_gain", c.reward.depth_gain);
      take(r, "noise", c.reward.noise);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const SimConfig& c) {
  const bool logistic = c.schedule.family == DepthSchedule::Family::Logistic;
  return {
      {"n_prompts", c.n_prompts},
      {"rollouts_per_prompt", c.rollouts_per_prompt},
      {"budget", c.budget},
      {"s_max", c.s_max},
      {"steps", c.steps},
      {"lambda_f", c.lambda_f},
      {"coupling", c.coupling},
      {"seed", c.seed},
      {"schedule",
       {{"family", logistic ? "logistic" : "constant"},
        {"intercept", c.schedule.intercept},
        {"slope", c.schedule.slope},
        {"probability", c.schedule.probability}}},
      {"reward_model",
       {{"base_accuracy", c.reward.base_accuracy},
        {"depth_gain", c.reward.depth_gain},
        {"noise", c.reward.noise}}},
  };
}

}  // namespace sdga
