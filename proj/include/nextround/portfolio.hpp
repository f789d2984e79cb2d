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

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/features.hpp"
#include "nextround/windows.hpp"

namespace nextround {

struct ScoredCompany {
  std::string company_id;
  double probability = 0;
};

// Top-k selection: the k companies with the largest predicted success
// probability, ties broken by company id ascending.
struct Portfolio {
  std::vector<ScoredCompany> entries;  // probability descending
  size_t k = 0;
  Date as_of;
};

inline Portfolio construct(std::vector<ScoredCompany> scored, size_t k, Date as_of = {}) {
  if (k > scored.size()) throw std::invalid_argument("portfolio: k exceeds candidate pool");
  std::sort(scored.begin(), scored.end(), [](const ScoredCompany& a, const ScoredCompany& b) {
    return a.probability != b.probability ? a.probability > b.probability
                                          : a.company_id < b.company_id;
  });
  Portfolio p;
  p.k = k;
  p.as_of = as_of;
  p.entries.assign(scored.begin(), scored.begin() + static_cast<long>(k));
  return p;
}

struct SuccessCurve {
  std::vector<std::pair<size_t, size_t>> points;  // (k, successes in top-k)
};

inline SuccessCurve success_curve(const std::vector<ScoredCompany>& scored,
                                  const std::map<std::string, int>& realized_labels,
                                  const std::vector<size_t>& ks) {
  Portfolio full = construct(scored, scored.size());
  std::vector<size_t> cumulative(scored.size() + 1, 0);
  for (size_t i = 0; i < full.entries.size(); ++i) {
    auto it = realized_labels.find(full.entries[i].company_id);
    const size_t hit = it != realized_labels.end() && it->second ? 1 : 0;
    cumulative[i + 1] = cumulative[i] + hit;
  }
  SuccessCurve curve;
  for (size_t k : ks) {
    if (k > scored.size()) continue;
    curve.points.emplace_back(k, cumulative[k]);
  }
  return curve;
}

enum class Stage { BeforeSeriesA, SeriesA, SeriesB };

inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::BeforeSeriesA: return "before_series_a";
    case Stage::SeriesA: return "series_a";
    case Stage::SeriesB: return "series_b";
  }
  return "";
}

// Default investment-stage taxonomy keyed on a company's latest round type.
// Later letters (C and beyond) and debt/corporate/other-equity rounds fall
// outside all three early-stage buckets.
using StageMap = std::map<RoundType, Stage>;

inline StageMap default_stage_map() {
  return {
      {RoundType::Seed, Stage::BeforeSeriesA},     {RoundType::PreSeed, Stage::BeforeSeriesA},
      {RoundType::Convertible, Stage::BeforeSeriesA}, {RoundType::NonEquity, Stage::BeforeSeriesA},
      {RoundType::A, Stage::SeriesA},              {RoundType::B, Stage::SeriesB},
  };
}

// Latest round strictly before as_of, if any.
inline std::optional<size_t> last_round_before(const EntityStore& store, size_t company_index,
                                               const Date& as_of) {
  std::optional<size_t> last;
  for (size_t r : store.rounds_of(company_index)) {
    if (!(store.rounds()[r].announced < as_of)) break;
    last = r;
  }
  return last;
}

inline std::optional<Stage> classify_stage(const EntityStore& store, size_t company_index,
                                           const Date& as_of,
                                           const StageMap& stage_map) {
  auto last = last_round_before(store, company_index, as_of);
  if (!last) return std::nullopt;
  auto it = stage_map.find(store.rounds()[*last].type);
  if (it == stage_map.end()) return std::nullopt;
  return it->second;
}

// Companies eligible at as_of whose latest prior round maps to the stage.
inline std::vector<size_t> stage_filter(const EntityStore& store, Stage stage, const Date& as_of,
                                        const StageMap& stage_map = default_stage_map()) {
  std::vector<size_t> out;
  for (size_t c = 0; c < store.companies().size(); ++c) {
    if (!eligible(store, c, as_of)) continue;
    auto s = classify_stage(store, c, as_of, stage_map);
    if (s && *s == stage) out.push_back(c);
  }
  return out;
}

// One row of the published portfolio-table format.
struct PortfolioRow {
  size_t rank = 0;
  std::string company_id;
  std::string name;
  double probability = 0;
  std::string last_deal;             // e.g. "series_b 2018-06-25"
  std::string first_deal_in_window;  // e.g. "series_c 2019-09-05" or "no_event"
  int label = 0;
};

struct BacktestResult {
  Portfolio portfolio;
  SuccessCurve curve;
  std::vector<PortfolioRow> rows;
  std::map<Stage, Portfolio> stage_portfolios;
  std::map<Stage, SuccessCurve> stage_curves;
  size_t pool_size = 0;
  size_t pool_successes = 0;
};

// Scores raw feature rows; fits any trained model family.
using ScoreFn = std::function<double(std::span<const double>)>;

namespace detail {

inline std::string describe_first_event_in_window(const EntityStore& store, size_t c,
                                                  const TimeWindow& w) {
  std::optional<std::pair<Date, std::string>> first;
  auto consider = [&](const Date& d, std::string what) {
    if (d < w.t_s || d > w.t_f) return;
    if (!first || d < first->first) first = {d, std::move(what)};
  };
  for (size_t r : store.rounds_of(c)) {
    const auto& round = store.rounds()[r];
    if (round.announced > w.t_f) break;
    consider(round.announced, std::string(round_type_name(round.type)));
  }
  const auto& ipo = store.ipo_date(c);
  if (ipo) consider(*ipo, "ipo");
  for (const Date& d : store.acquisition_dates(c)) consider(d, "acquisition");
  if (!first) return "no_event";
  return first->second + " " + to_string(first->first);
}

}  // namespace detail

// Out-of-sample validation: train on the given windows, score every company
// eligible at the out-of-sample t_s with features as of that t_s, realize
// labels inside the window. Refuses configurations where the out-of-sample
// window overlaps training.
inline BacktestResult backtest(
    const EntityStore& store,
    const std::function<ScoreFn(const Dataset&)>& trainer,
    const std::vector<TimeWindow>& train_windows, const TimeWindow& oos_window, size_t top_k,
    const std::vector<size_t>& curve_ks, const FeatureConfig& feature_cfg = {},
    const StageMap& stage_map = default_stage_map()) {
  for (const auto& w : train_windows) {
    if (!(oos_window.t_s > w.t_f))
      throw std::invalid_argument("backtest: training window overlaps the out-of-sample window");
  }

  auto train_samples = build_samples(store, train_windows);
  if (train_samples.empty()) throw std::invalid_argument("backtest: no training samples");
  Dataset train = feature_matrix(store, train_samples, feature_cfg);
  ScoreFn score = trainer(train);

  BacktestResult result;
  std::vector<ScoredCompany> scored;
  std::map<std::string, int> labels;
  std::vector<size_t> candidate_index;
  for (size_t c = 0; c < store.companies().size(); ++c) {
    if (!eligible(store, c, oos_window.t_s)) continue;
    auto x = compute_factors(store, c, oos_window.t_s, feature_cfg);
    const double p = score(x);
    const int label = success_label(store, c, oos_window);
    scored.push_back(ScoredCompany{store.companies()[c].id, p});
    labels[store.companies()[c].id] = label;
    candidate_index.push_back(c);
    result.pool_successes += label != 0;
  }
  result.pool_size = scored.size();
  if (top_k > scored.size()) top_k = scored.size();

  result.portfolio = construct(scored, top_k, oos_window.t_s);
  result.curve = success_curve(scored, labels, curve_ks);

  for (size_t rank = 0; rank < result.portfolio.entries.size(); ++rank) {
    const auto& entry = result.portfolio.entries[rank];
    const size_t c = *store.company_index(entry.company_id);
    PortfolioRow row;
    row.rank = rank + 1;
    row.company_id = entry.company_id;
    row.name = store.companies()[c].name;
    row.probability = entry.probability;
    auto last = last_round_before(store, c, oos_window.t_s);
    row.last_deal = last ? std::string(round_type_name(store.rounds()[*last].type)) + " " +
                               to_string(store.rounds()[*last].announced)
                         : "none";
    row.first_deal_in_window = detail::describe_first_event_in_window(store, c, oos_window);
    row.label = labels[entry.company_id];
    result.rows.push_back(std::move(row));
  }

  for (Stage stage : {Stage::BeforeSeriesA, Stage::SeriesA, Stage::SeriesB}) {
    std::vector<ScoredCompany> stage_scored;
    for (size_t i = 0; i < candidate_index.size(); ++i) {
      auto s = classify_stage(store, candidate_index[i], oos_window.t_s, stage_map);
      if (s && *s == stage) stage_scored.push_back(scored[i]);
    }
    if (stage_scored.empty()) continue;
    result.stage_portfolios[stage] =
        construct(stage_scored, std::min(top_k, stage_scored.size()), oos_window.t_s);
    result.stage_curves[stage] = success_curve(stage_scored, labels, curve_ks);
  }
  return result;
}

inline std::string portfolio_csv(const std::vector<PortfolioRow>& rows) {
  std::string out = "rank,company_id,name,probability,last_deal,first_deal_in_window,label\n";
  for (const auto& r : rows) {
    write_csv_row(out, {std::to_string(r.rank), r.company_id, r.name,
                        format_double(r.probability), r.last_deal, r.first_deal_in_window,
                        std::to_string(r.label)});
  }
  return out;
}

inline std::string success_curve_csv(const SuccessCurve& curve) {
  std::string out = "k,successes\n";
  for (const auto& [k, s] : curve.points)
    write_csv_row(out, {std::to_string(k), std::to_string(s)});
  return out;
}

}  // namespace nextround
