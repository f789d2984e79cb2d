/*
 * Copyright 2026 The nextround authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nextround/metrics.hpp"
#include "nextround/rng.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Analytic + empirical metrics of the coin-flip baseline: predict positive
// with probability 1/2 regardless of features.
struct RandomBaseline {
  Metrics empirical;
  double expected_precision = 0;  // = positive base rate
  double expected_recall = 0.5;
  double expected_f1 = 0;
};

inline RandomBaseline random_baseline(const std::vector<int>& labels, uint64_t seed) {
  if (labels.empty()) throw std::invalid_argument("random_baseline: empty labels");
  Rng rng(seed);
  std::vector<int> predicted(labels.size());
  for (auto& p : predicted) p = rng.bernoulli(0.5);
  RandomBaseline rb;
  rb.empirical = compute_metrics(predicted, labels);
  double base_rate = 0;
  for (int y : labels) base_rate += y != 0;
  base_rate /= static_cast<double>(labels.size());
  rb.expected_precision = base_rate;
  rb.expected_recall = 0.5;
  rb.expected_f1 = 2.0 * base_rate * 0.5 / (base_rate + 0.5);
  return rb;
}

// One hyperparameter dimension: a uniform numeric range (optionally log10
// scaled or rounded to integers) or a categorical choice list.
struct ParamRange {
  double lo = 0, hi = 1;
  bool log_scale = false;
  bool integral = false;
};

using ParamSpace = std::map<std::string, std::variant<ParamRange, std::vector<std::string>>>;
using ParamPoint = std::map<std::string, nlohmann::json>;

struct Trial {
  int index = 0;
  ParamPoint point;
  double score = 0;
};

struct TuneResult {
  ParamPoint best;
  double best_score = 0;
  std::vector<Trial> trials;
};

// Seeded random search. Each trial draws from an independent stream derived
// from (seed, trial index), so running a larger budget with the same seed
// replays every earlier trial before adding new ones.
inline TuneResult tune(const ParamSpace& space, int budget, uint64_t seed,
                       const std::function<double(const ParamPoint&)>& evaluate) {
  if (budget < 1) throw std::invalid_argument("tune: budget must be >= 1");
  TuneResult result;
  result.best_score = -std::numeric_limits<double>::infinity();
  Rng base(seed);
  for (int t = 0; t < budget; ++t) {
    Rng rng = base.fork(static_cast<uint64_t>(t));
    ParamPoint point;
    for (const auto& [name, dim] : space) {
      if (std::holds_alternative<ParamRange>(dim)) {
        const auto& r = std::get<ParamRange>(dim);
        double v;
        if (r.log_scale)
          v = std::pow(10.0, rng.uniform(std::log10(r.lo), std::log10(r.hi)));
        else
          v = rng.uniform(r.lo, r.hi);
        if (r.integral)
          point[name] = static_cast<int64_t>(std::llround(v));
        else
          point[name] = v;
      } else {
        const auto& choices = std::get<std::vector<std::string>>(dim);
        point[name] = choices[rng.below(choices.size())];
      }
    }
    Trial trial;
    trial.index = t;
    trial.point = point;
    trial.score = evaluate(point);
    if (trial.score > result.best_score) {
      result.best_score = trial.score;
      result.best = point;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

inline std::string trial_log_csv(const TuneResult& r) {
  std::string out = "trial,score,params\n";
  for (const auto& t : r.trials) {
    nlohmann::json p(t.point);
    write_csv_row(out, {std::to_string(t.index), format_double(t.score), p.dump()});
  }
  return out;
}

}  // namespace nextround
