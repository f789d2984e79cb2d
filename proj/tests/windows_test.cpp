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

#include <gtest/gtest.h>

#include "nextround/windows.hpp"

namespace nextround {
namespace {

EntityStore store_with(std::vector<Company> companies, std::vector<FundingRound> rounds = {},
                       std::vector<ExitEvent> exits = {}) {
  EntityStoreBuilder b;
  b.companies = std::move(companies);
  b.rounds = std::move(rounds);
  b.exits = std::move(exits);
  return std::move(b).freeze();
}

Company company(const std::string& id, Date founded) {
  Company c;
  c.id = id;
  c.name = id;
  c.founded = founded;
  return c;
}

FundingRound round(const std::string& id, const std::string& cid, Date announced,
                   RoundType t = RoundType::Seed) {
  FundingRound r;
  r.id = id;
  r.company_id = cid;
  r.type = t;
  r.announced = announced;
  return r;
}

TEST(WindowSchedule, MatchesPublishedBoundaries) {
  auto windows = window_schedule();
  ASSERT_EQ(windows.size(), 13u);
  EXPECT_EQ(to_string(windows[0].t_s), "2000-01-01");
  EXPECT_EQ(to_string(windows[0].t_f), "2001-06-30");
  EXPECT_EQ(to_string(windows[12].t_s), "2018-01-01");
  EXPECT_EQ(to_string(windows[12].t_f), "2019-06-30");
  // consecutive and non-overlapping
  for (size_t i = 1; i < windows.size(); ++i) {
    EXPECT_EQ(days_from_civil(windows[i].t_s), days_from_civil(windows[i - 1].t_f) + 1);
    EXPECT_EQ(windows[i].index, static_cast<int>(i));
  }
}

TEST(Eligibility, RequiresPriorRoundAndNoExit) {
  Date ts{2009, 1, 1};
  auto base = company("c1", Date{2005, 1, 1});

  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 3, 1})});
    EXPECT_TRUE(eligible(s, 0, ts));
  }
  {
    auto s = store_with({base});  // zero rounds before t_s
    EXPECT_FALSE(eligible(s, 0, ts));
  }
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2009, 1, 1})});  // not strictly before
    EXPECT_FALSE(eligible(s, 0, ts));
  }
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 3, 1})},
                        {ExitEvent{"c1", ExitKind::Acquisition, Date{2008, 5, 1}}});
    EXPECT_FALSE(eligible(s, 0, ts));
  }
  {
    auto closed = base;
    closed.closed = Date{2008, 12, 31};
    auto s = store_with({closed}, {round("r1", "c1", Date{2006, 3, 1})});
    EXPECT_FALSE(eligible(s, 0, ts));
  }
  {
    // founded exactly on t_s: enters the next window, not this one
    auto s = store_with({company("c1", ts)}, {round("r1", "c1", Date{2009, 2, 1})});
    EXPECT_FALSE(eligible(s, 0, ts));
  }
}

TEST(Label, InclusiveWindowBoundaries) {
  TimeWindow w{0, Date{2009, 1, 1}, Date{2010, 6, 30}};
  auto base = company("c1", Date{2005, 1, 1});
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 1, 1}),
                                 round("r2", "c1", Date{2010, 6, 30})});
    EXPECT_EQ(success_label(s, 0, w), 1);  // round lands exactly on t_f
  }
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 1, 1}),
                                 round("r2", "c1", Date{2010, 8, 15})});
    EXPECT_EQ(success_label(s, 0, w), 0);  // next round two months after t_f
  }
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 1, 1})},
                        {ExitEvent{"c1", ExitKind::IPO, Date{2009, 7, 1}}});
    EXPECT_EQ(success_label(s, 0, w), 1);  // IPO inside the window
  }
  {
    auto s = store_with({base}, {round("r1", "c1", Date{2006, 1, 1})},
                        {ExitEvent{"c1", ExitKind::Acquisition, Date{2009, 1, 1}}});
    EXPECT_EQ(success_label(s, 0, w), 1);  // acquisition on t_s
  }
}

TEST(Label, InvariantToEventsOutsideWindow) {
  TimeWindow w{0, Date{2009, 1, 1}, Date{2010, 6, 30}};
  auto base = company("c1", Date{2005, 1, 1});
  auto s1 = store_with({base}, {round("r1", "c1", Date{2006, 1, 1})});
  auto s2 = store_with({base}, {round("r1", "c1", Date{2006, 1, 1}),
                                round("r2", "c1", Date{2011, 1, 1})});
  EXPECT_EQ(success_label(s1, 0, w), success_label(s2, 0, w));
}

TEST(BuildSamples, OneEventPerEligibleWindow) {
  // founded 2004, seed 2005-06: eligible from the 2006-01 window (index 4)
  // through the rest of the schedule unless an exit intervenes.
  auto s = store_with({company("c1", Date{2004, 1, 1})},
                      {round("r1", "c1", Date{2005, 6, 1})});
  auto samples = build_samples(s);
  ASSERT_FALSE(samples.empty());
  EXPECT_EQ(samples.front().window.index, 4);
  EXPECT_EQ(samples.size(), 13u - 4u);
  for (const auto& ev : samples) EXPECT_EQ(ev.company_id, "c1");
}

TEST(BuildSamples, EmptyStoreGivesEmptyList) {
  auto s = store_with({});
  EXPECT_TRUE(build_samples(s).empty());
}

TEST(BuildSamples, DeterministicOrdering) {
  auto s = store_with({company("b", Date{2004, 1, 1}), company("a", Date{2004, 1, 1})},
                      {round("r1", "b", Date{2005, 6, 1}), round("r2", "a", Date{2005, 6, 1})});
  auto samples = build_samples(s);
  ASSERT_GE(samples.size(), 2u);
  EXPECT_EQ(samples[0].company_id, "a");
  EXPECT_EQ(samples[1].company_id, "b");
  for (size_t i = 1; i < samples.size(); ++i) {
    EXPECT_LE(samples[i - 1].window.index, samples[i].window.index);
  }
}

TEST(Split, SizesAndDeterminism) {
  auto s1 = split_train_test(10, 0.9, 7);
  EXPECT_EQ(s1.train.size(), 9u);
  EXPECT_EQ(s1.test.size(), 1u);

  auto s2 = split_train_test(10, 0.9, 7);
  EXPECT_EQ(s1.train, s2.train);
  EXPECT_EQ(s1.test, s2.test);

  auto s3 = split_train_test(10, 0.9, 8);
  EXPECT_TRUE(s1.train != s3.train || s1.test != s3.test);

  // partition property
  std::vector<size_t> all = s1.train;
  all.insert(all.end(), s1.test.begin(), s1.test.end());
  std::sort(all.begin(), all.end());
  for (size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);

  EXPECT_THROW(split_train_test(0, 0.9, 1), std::invalid_argument);
  EXPECT_THROW(split_train_test(10, 1.0, 1), std::invalid_argument);
}

TEST(Split, PositiveRateRoughlyPreservedAtScale) {
  // statistical sanity: 24% positives, n=20000, difference under 1 point
  const size_t n = 20000;
  std::vector<int> labels(n);
  Rng rng(5);
  for (auto& y : labels) y = rng.bernoulli(0.24);
  auto split = split_train_test(n, 0.9, 11);
  auto rate = [&](const std::vector<size_t>& idx) {
    double p = 0;
    for (size_t i : idx) p += labels[i];
    return p / static_cast<double>(idx.size());
  };
  EXPECT_NEAR(rate(split.train), rate(split.test), 0.01);
}

TEST(WindowStudy, FirstWindowSingleEqualsMultiple) {
  auto s = store_with({company("c1", Date{1995, 1, 1}), company("c2", Date{1995, 1, 1}),
                       company("c3", Date{1995, 1, 1}), company("c4", Date{1995, 1, 1}),
                       company("c5", Date{1995, 1, 1}), company("c6", Date{1995, 1, 1}),
                       company("c7", Date{1995, 1, 1}), company("c8", Date{1995, 1, 1}),
                       company("c9", Date{1995, 1, 1}), company("c10", Date{1995, 1, 1})},
                      {round("r1", "c1", Date{1996, 1, 1}), round("r2", "c2", Date{1996, 1, 1}),
                       round("r3", "c3", Date{1996, 1, 1}), round("r4", "c4", Date{1996, 1, 1}),
                       round("r5", "c5", Date{1996, 1, 1}), round("r6", "c6", Date{1996, 1, 1}),
                       round("r7", "c7", Date{1996, 1, 1}), round("r8", "c8", Date{1996, 1, 1}),
                       round("r9", "c9", Date{1996, 1, 1}), round("r10", "c10", Date{1996, 1, 1})});
  auto samples = build_samples(s);
  auto single = window_study_sets(samples, 0, WindowMode::Single, StudyProtocol::InSample, 0.9, 3);
  auto multiple =
      window_study_sets(samples, 0, WindowMode::Multiple, StudyProtocol::InSample, 0.9, 3);
  EXPECT_EQ(single.train, multiple.train);
  EXPECT_EQ(single.test, multiple.test);
}

TEST(WindowStudy, MultipleIsUnionOfHistory) {
  std::vector<Company> cs;
  std::vector<FundingRound> rs;
  for (int i = 0; i < 6; ++i) {
    cs.push_back(company("c" + std::to_string(i), Date{1995, 1, 1}));
    rs.push_back(round("r" + std::to_string(i), "c" + std::to_string(i), Date{1996, 1, 1}));
  }
  auto s = store_with(cs, rs);
  auto samples = build_samples(s);

  auto oos_single =
      window_study_sets(samples, 2, WindowMode::Single, StudyProtocol::OutOfSample, 0.9, 3);
  auto oos_multi =
      window_study_sets(samples, 2, WindowMode::Multiple, StudyProtocol::OutOfSample, 0.9, 3);
  for (size_t i : oos_single.train) EXPECT_EQ(samples[i].window.index, 1);
  for (size_t i : oos_multi.train) EXPECT_LT(samples[i].window.index, 2);
  for (size_t i : oos_multi.test) EXPECT_EQ(samples[i].window.index, 2);
  EXPECT_GT(oos_multi.train.size(), oos_single.train.size());

  // in-sample: multiple = history plus the train part of the current window
  auto in_single =
      window_study_sets(samples, 2, WindowMode::Single, StudyProtocol::InSample, 0.9, 3);
  auto in_multi =
      window_study_sets(samples, 2, WindowMode::Multiple, StudyProtocol::InSample, 0.9, 3);
  EXPECT_EQ(in_single.test, in_multi.test);
  size_t history = 0;
  for (size_t i : in_multi.train) history += samples[i].window.index < 2;
  EXPECT_EQ(in_multi.train.size(), in_single.train.size() + history);
  EXPECT_GT(history, 0u);
}

TEST(LabelDistribution, CountsPerWindow) {
  auto s = store_with({company("c1", Date{2004, 1, 1})},
                      {round("r1", "c1", Date{2005, 6, 1}), round("r2", "c1", Date{2006, 8, 1})});
  auto windows = window_schedule();
  auto samples = build_samples(s, windows);
  auto rows = label_distribution(samples, windows);
  ASSERT_EQ(rows.size(), 13u);
  // window 4 (2006-01..2007-06) contains r2: success
  EXPECT_EQ(rows[4].success, 1u);
  EXPECT_EQ(rows[4].fail, 0u);
  EXPECT_EQ(rows[5].success, 0u);
  EXPECT_EQ(rows[5].fail, 1u);
}

}  // namespace
}  // namespace nextround
