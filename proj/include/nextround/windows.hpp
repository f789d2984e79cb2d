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
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/entities.hpp"
#include "nextround/rng.hpp"

namespace nextround {

// An 18-month evaluation interval. t_s is the prediction moment; success is
// realized in [t_s, t_f] inclusive. Features use facts strictly before t_s.
struct TimeWindow {
  int index = 0;
  Date t_s;
  Date t_f;
};

struct SampleEvent {
  size_t company_index = 0;
  std::string company_id;
  TimeWindow window;
  int label = 0;
};

inline constexpr int kWindowMonths = 18;

// The 13 consecutive windows from 2000-01-01 through 2019-06-30.
inline std::vector<TimeWindow> window_schedule() {
  std::vector<TimeWindow> windows;
  Date ts{2000, 1, 1};
  for (int i = 0; i < 13; ++i) {
    Date tf = end_of_month_after(ts, kWindowMonths - 1);
    windows.push_back(TimeWindow{i, ts, tf});
    ts = next_day(tf);
  }
  return windows;
}

// Arbitrary window starting at ts, used by out-of-sample backtests.
inline TimeWindow make_window(const Date& ts, int index = 0) {
  return TimeWindow{index, ts, end_of_month_after(ts, kWindowMonths - 1)};
}

// A company enters a window when it was founded strictly before t_s, has at
// least one funding round strictly before t_s, and has not exited or closed
// strictly before t_s.
inline bool eligible(const EntityStore& store, size_t company_index, const Date& ts) {
  const Company& c = store.companies()[company_index];
  if (!c.founded || !(*c.founded < ts)) return false;
  if (c.closed && *c.closed < ts) return false;
  const auto& ipo = store.ipo_date(company_index);
  if (ipo && *ipo < ts) return false;
  const auto& acqs = store.acquisition_dates(company_index);
  if (!acqs.empty() && acqs.front() < ts) return false;
  const auto& rounds = store.rounds_of(company_index);
  if (rounds.empty()) return false;
  return store.rounds()[rounds.front()].announced < ts;
}

// Label per the success definition: any funding round, acquisition, or IPO
// inside [t_s, t_f] inclusive.
inline int success_label(const EntityStore& store, size_t company_index, const TimeWindow& w) {
  for (size_t r : store.rounds_of(company_index)) {
    const Date& d = store.rounds()[r].announced;
    if (d > w.t_f) break;  // rounds are date-sorted
    if (d >= w.t_s) return 1;
  }
  const auto& ipo = store.ipo_date(company_index);
  if (ipo && *ipo >= w.t_s && *ipo <= w.t_f) return 1;
  for (const Date& d : store.acquisition_dates(company_index)) {
    if (d > w.t_f) break;
    if (d >= w.t_s) return 1;
  }
  return 0;
}

// One sample per (eligible company, window), ordered by (window, company id).
// Companies are already id-sorted in the store.
inline std::vector<SampleEvent> build_samples(const EntityStore& store,
                                              const std::vector<TimeWindow>& windows) {
  std::vector<SampleEvent> samples;
  for (const auto& w : windows) {
    for (size_t c = 0; c < store.companies().size(); ++c) {
      if (!eligible(store, c, w.t_s)) continue;
      SampleEvent e;
      e.company_index = c;
      e.company_id = store.companies()[c].id;
      e.window = w;
      e.label = success_label(store, c, w);
      samples.push_back(std::move(e));
    }
  }
  return samples;
}

inline std::vector<SampleEvent> build_samples(const EntityStore& store) {
  return build_samples(store, window_schedule());
}

struct SampleSplit {
  std::vector<size_t> train;  // indices into the sample list
  std::vector<size_t> test;
  uint64_t seed = 0;
};

// Plain seeded shuffle + split, no stratification.
inline SampleSplit split_train_test(size_t n_samples, double ratio, uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("split_train_test: empty sample list");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0,1)");
  std::vector<size_t> order(n_samples);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const size_t n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(n_samples)));
  SampleSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

inline SampleSplit split_train_test(const std::vector<SampleEvent>& samples, double ratio,
                                    uint64_t seed) {
  return split_train_test(samples.size(), ratio, seed);
}

enum class WindowMode { Single, Multiple };
enum class StudyProtocol { InSample, OutOfSample };

struct WindowStudySets {
  std::vector<size_t> train;  // indices into the sample list
  std::vector<size_t> test;
};

// Training/test index sets for the single-vs-multiple time window study.
//
// InSample at window k:   test = 10% split of window k; single trains on the
//   remaining 90%; multiple adds every sample of windows < k.
// OutOfSample at window k: test = all of window k; single trains on window
//   k-1; multiple trains on windows 0..k-1.
//
// Window 0 has no history, so Multiple falls back to Single there.
inline WindowStudySets window_study_sets(const std::vector<SampleEvent>& samples, int window_index,
                                         WindowMode mode, StudyProtocol protocol, double ratio,
                                         uint64_t seed) {
  if (protocol == StudyProtocol::OutOfSample && window_index < 1)
    throw std::invalid_argument("out-of-sample study needs window_index >= 1");

  std::vector<size_t> current, history, previous;
  for (size_t i = 0; i < samples.size(); ++i) {
    const int w = samples[i].window.index;
    if (w == window_index) current.push_back(i);
    if (w < window_index) history.push_back(i);
    if (w == window_index - 1) previous.push_back(i);
  }

  WindowStudySets sets;
  if (protocol == StudyProtocol::InSample) {
    if (current.empty()) throw std::runtime_error("window has no samples");
    SampleSplit split = split_train_test(current.size(), ratio, seed);
    for (size_t i : split.test) sets.test.push_back(current[i]);
    std::vector<size_t> train_current;
    for (size_t i : split.train) train_current.push_back(current[i]);
    if (mode == WindowMode::Multiple) sets.train = history;
    sets.train.insert(sets.train.end(), train_current.begin(), train_current.end());
    std::sort(sets.train.begin(), sets.train.end());
  } else {
    sets.test = current;
    sets.train = (mode == WindowMode::Multiple) ? history : previous;
  }
  return sets;
}

struct LabelDistributionRow {
  TimeWindow window;
  size_t success = 0;
  size_t fail = 0;
};

inline std::vector<LabelDistributionRow> label_distribution(
    const std::vector<SampleEvent>& samples, const std::vector<TimeWindow>& windows) {
  std::vector<LabelDistributionRow> rows;
  rows.reserve(windows.size());
  for (const auto& w : windows) rows.push_back(LabelDistributionRow{w, 0, 0});
  for (const auto& s : samples) {
    auto& row = rows[static_cast<size_t>(s.window.index)];
    if (s.label)
      ++row.success;
    else
      ++row.fail;
  }
  return rows;
}

}  // namespace nextround
