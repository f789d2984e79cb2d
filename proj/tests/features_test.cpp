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

#include "nextround/features.hpp"

namespace nextround {
namespace {

struct FixtureBuilder {
  EntityStoreBuilder b;

  Company& company(const std::string& id, Date founded) {
    Company c;
    c.id = id;
    c.name = id;
    c.founded = founded;
    b.companies.push_back(std::move(c));
    return b.companies.back();
  }

  FundingRound& round(const std::string& id, const std::string& cid, Date announced,
                      std::optional<double> amount = std::nullopt,
                      std::vector<std::string> investors = {}) {
    FundingRound r;
    r.id = id;
    r.company_id = cid;
    r.announced = announced;
    r.raised_usd = amount;
    std::sort(investors.begin(), investors.end());
    r.investor_ids = std::move(investors);
    b.rounds.push_back(std::move(r));
    return b.rounds.back();
  }

  EntityStore freeze() { return std::move(b).freeze(); }
};

TEST(Factors, FoundYearOffsetAndAge) {
  Company c;
  c.founded = Date{1990, 5, 1};
  EXPECT_EQ(found_year_offset(c), 0);
  c.founded = Date{1995, 1, 1};
  EXPECT_EQ(found_year_offset(c), 5);
  c.founded = Date{2018, 12, 31};
  EXPECT_EQ(found_year_offset(c), 28);

  c.founded = Date{2005, 3, 15};
  EXPECT_EQ(company_age_months(c, Date{2009, 1, 1}), 46);
  c.founded = Date{2008, 12, 2};
  EXPECT_EQ(company_age_months(c, Date{2009, 1, 1}), 1);
  c.founded = Date{2009, 1, 1};  // same month, earlier day
  EXPECT_EQ(company_age_months(c, Date{2009, 1, 20}), 0);
}

TEST(Factors, MacroeconomyCountsFoundingYearPeers) {
  FixtureBuilder f;
  f.company("a", Date{2010, 1, 1});
  f.company("b", Date{2010, 7, 1});
  f.company("c", Date{2010, 12, 31});
  f.company("d", Date{2011, 1, 1});
  auto s = f.freeze();
  EXPECT_EQ(macroeconomy(s, *s.find_company("a")), 3);
  EXPECT_EQ(macroeconomy(s, *s.find_company("d")), 1);
}

TEST(Factors, NewsCountAndMonthlyAverage) {
  FixtureBuilder f;
  f.company("a", Date{2007, 1, 1});
  for (int m = 0; m < 12; ++m)
    f.b.news.push_back(NewsItem{"a", Date{2007, 1 + m, 10}});
  f.b.news.push_back(NewsItem{"a", Date{2010, 1, 1}});  // after t_s, ignored
  auto s = f.freeze();
  auto nf = news_factors(s, *s.company_index("a"), Date{2009, 1, 1});
  EXPECT_EQ(nf.news_count, 12);
  EXPECT_DOUBLE_EQ(nf.monthly_avg, 0.5);  // age 24 months

  FixtureBuilder g;
  g.company("b", Date{2009, 1, 1});
  g.b.news.push_back(NewsItem{"b", Date{2009, 1, 2}});
  g.b.news.push_back(NewsItem{"b", Date{2009, 1, 3}});
  g.b.news.push_back(NewsItem{"b", Date{2009, 1, 4}});
  auto s2 = g.freeze();
  auto nf2 = news_factors(s2, *s2.company_index("b"), Date{2009, 1, 20});
  EXPECT_EQ(nf2.news_count, 3);
  EXPECT_DOUBLE_EQ(nf2.monthly_avg, 3.0);  // age 0 falls back to the raw count
}

TEST(Factors, ProsperityExcludesClosedAndUnfounded) {
  FixtureBuilder f;
  auto& a = f.company("a", Date{2000, 1, 1});
  a.city = "Springfield";
  auto& b = f.company("b", Date{2001, 1, 1});
  b.city = "Springfield";
  auto& c = f.company("c", Date{2002, 1, 1});
  c.city = "Springfield";
  c.closed = Date{2007, 1, 1};
  auto& d = f.company("d", Date{2010, 6, 1});  // founded after t_s
  d.city = "Springfield";
  auto s = f.freeze();
  EXPECT_DOUBLE_EQ(area_prosperity(s.city_timeline("Springfield"), Date{2009, 1, 1}), 2.0);

  // a company with no city gets Missing city prosperity through compute_factors
  FixtureBuilder g;
  g.company("x", Date{2000, 1, 1});
  g.round("r", "x", Date{2001, 1, 1});
  auto s2 = g.freeze();
  auto factors = compute_factors(s2, 0, Date{2009, 1, 1});
  EXPECT_TRUE(is_missing(factors[kCityProsperity]));
  EXPECT_TRUE(is_missing(factors[kProvinceProsperity]));
}

TEST(Factors, IndustryProsperityMeanMax) {
  FixtureBuilder f;
  auto& a = f.company("a", Date{2000, 1, 1});
  a.province = "P";
  a.industries = {"ai", "biotech"};
  // ai peers in P: a plus 1 more; biotech peers in P: a plus 5 more
  for (int i = 0; i < 1; ++i) {
    auto& c = f.company("ai" + std::to_string(i), Date{2001, 1, 1});
    c.province = "P";
    c.industries = {"ai"};
  }
  for (int i = 0; i < 5; ++i) {
    auto& c = f.company("bio" + std::to_string(i), Date{2002, 1, 1});
    c.province = "P";
    c.industries = {"biotech"};
  }
  auto s = f.freeze();
  auto ip = industry_prosperity(s, *s.find_company("a"), Date{2009, 1, 1});
  EXPECT_DOUBLE_EQ(ip.mean_province, 4.0);  // counts {2, 6}
  EXPECT_DOUBLE_EQ(ip.max_province, 6.0);
  EXPECT_TRUE(is_missing(ip.mean_city));  // no city on record

  // single industry: mean == max
  auto one = industry_prosperity(s, *s.find_company("ai0"), Date{2009, 1, 1});
  EXPECT_DOUBLE_EQ(one.mean_province, one.max_province);

  // empty industry set: everything missing
  FixtureBuilder g;
  auto& x = g.company("x", Date{2000, 1, 1});
  x.province = "P";
  auto s2 = g.freeze();
  auto none = industry_prosperity(s2, *s2.find_company("x"), Date{2009, 1, 1});
  EXPECT_TRUE(is_missing(none.mean_province));
  EXPECT_TRUE(is_missing(none.max_province));
}

TEST(Factors, FundingFactorsCutoffAndMissingTotal) {
  FixtureBuilder f;
  f.company("a", Date{2000, 1, 1});
  f.round("r1", "a", Date{2001, 1, 1}, 1e6);
  f.round("r2", "a", Date{2002, 1, 1}, 4e6);
  f.round("r3", "a", Date{2010, 1, 1}, 1e7);  // after t_s
  auto s = f.freeze();
  auto ff = funding_factors(s, *s.company_index("a"), Date{2009, 1, 1});
  EXPECT_EQ(ff.num_rounds, 2);
  EXPECT_DOUBLE_EQ(ff.total_raised, 5e6);

  FixtureBuilder g;
  g.company("b", Date{2000, 1, 1});
  g.round("q1", "b", Date{2001, 1, 1});
  g.round("q2", "b", Date{2002, 1, 1});
  auto s2 = g.freeze();
  auto ff2 = funding_factors(s2, *s2.company_index("b"), Date{2009, 1, 1});
  EXPECT_EQ(ff2.num_rounds, 2);
  EXPECT_TRUE(is_missing(ff2.total_raised));  // no amounts at all

  FixtureBuilder h;
  h.company("c", Date{2000, 1, 1});
  h.round("p1", "c", Date{2001, 1, 1}, 0.0);
  auto s3 = h.freeze();
  auto ff3 = funding_factors(s3, *s3.company_index("c"), Date{2009, 1, 1});
  EXPECT_EQ(ff3.num_rounds, 1);
  EXPECT_DOUBLE_EQ(ff3.total_raised, 0.0);
}

TEST(Factors, InvestorTrackRecord) {
  FixtureBuilder f;
  // v1 invests in 10 companies before t_s; 2 of them IPO before t_s
  for (int i = 0; i < 10; ++i) {
    std::string cid = "c" + std::to_string(i);
    f.company(cid, Date{2000, 1, 1});
    f.round("r" + std::to_string(i), cid, Date{2001, 1, 1}, 100.0, {"v1"});
  }
  f.b.exits.push_back(ExitEvent{"c0", ExitKind::IPO, Date{2005, 1, 1}});
  f.b.exits.push_back(ExitEvent{"c1", ExitKind::IPO, Date{2006, 1, 1}});
  f.b.exits.push_back(ExitEvent{"c2", ExitKind::IPO, Date{2012, 1, 1}});  // after t_s
  f.b.exits.push_back(ExitEvent{"c3", ExitKind::Acquisition, Date{2004, 1, 1}});
  auto s = f.freeze();
  auto tr = investor_track_record(s, "v1", Date{2009, 1, 1});
  EXPECT_DOUBLE_EQ(tr.ipo_fraction, 0.2);
  EXPECT_DOUBLE_EQ(tr.acq_fraction, 0.1);

  // investor with no deals before t_s
  auto none = investor_track_record(s, "v1", Date{2000, 6, 1});
  EXPECT_TRUE(is_missing(none.ipo_fraction));
  EXPECT_TRUE(is_missing(investor_track_record(s, "ghost", Date{2009, 1, 1}).ipo_fraction));
}

TEST(Factors, InvestorTrackRecordPerDealFlag) {
  FixtureBuilder f;
  // v1: two deals into c0 (one portfolio company), one deal into c1; c0 IPOs
  f.company("c0", Date{2000, 1, 1});
  f.company("c1", Date{2000, 1, 1});
  f.round("r0", "c0", Date{2001, 1, 1}, 100.0, {"v1"});
  f.round("r1", "c0", Date{2002, 1, 1}, 100.0, {"v1"});
  f.round("r2", "c1", Date{2003, 1, 1}, 100.0, {"v1"});
  f.b.exits.push_back(ExitEvent{"c0", ExitKind::IPO, Date{2005, 1, 1}});
  auto s = f.freeze();
  auto per_company = investor_track_record(s, "v1", Date{2009, 1, 1});
  EXPECT_DOUBLE_EQ(per_company.ipo_fraction, 0.5);  // 1 of 2 companies
  FeatureConfig cfg;
  cfg.investor_fractions_per_deal = true;
  auto per_deal = investor_track_record(s, "v1", Date{2009, 1, 1}, cfg);
  EXPECT_DOUBLE_EQ(per_deal.ipo_fraction, 2.0 / 3.0);  // 2 of 3 deals
}

TEST(Factors, InvestorFactorsAggregation) {
  FixtureBuilder f;
  // company "x" raised from v1 and v2; x itself joins each investor's
  // portfolio, so give them 4 other companies each for clean fractions:
  // v1 track: 5 companies, 1 IPO -> 0.2 ; v2 track: 5 companies, 2 IPO -> 0.4
  f.company("x", Date{2000, 1, 1});
  f.round("rx", "x", Date{2006, 1, 1}, 100.0, {"v1", "v2"});
  for (int i = 0; i < 4; ++i) {
    std::string cid = "v1c" + std::to_string(i);
    f.company(cid, Date{2000, 1, 1});
    f.round("rv1" + std::to_string(i), cid, Date{2001, 1, 1}, 10.0, {"v1"});
  }
  for (int i = 0; i < 4; ++i) {
    std::string cid = "v2c" + std::to_string(i);
    f.company(cid, Date{2000, 1, 1});
    f.round("rv2" + std::to_string(i), cid, Date{2001, 1, 1}, 10.0, {"v2"});
  }
  f.b.exits.push_back(ExitEvent{"v1c0", ExitKind::IPO, Date{2003, 1, 1}});
  f.b.exits.push_back(ExitEvent{"v2c0", ExitKind::IPO, Date{2003, 1, 1}});
  f.b.exits.push_back(ExitEvent{"v2c1", ExitKind::IPO, Date{2003, 1, 1}});
  auto s = f.freeze();
  auto inv = investor_factors(s, *s.company_index("x"), Date{2009, 1, 1});
  EXPECT_NEAR(inv.mean_ipo, 0.3, 1e-12);
  EXPECT_NEAR(inv.max_ipo, 0.4, 1e-12);

  // rounds with no recorded investors -> Missing
  FixtureBuilder g;
  g.company("y", Date{2000, 1, 1});
  g.round("ry", "y", Date{2006, 1, 1}, 100.0);
  auto s2 = g.freeze();
  auto inv2 = investor_factors(s2, *s2.company_index("y"), Date{2009, 1, 1});
  EXPECT_TRUE(is_missing(inv2.mean_ipo));
}

TEST(Factors, FounderFailFractions) {
  FixtureBuilder f;
  // founder p1: prior companies old1 (closed) and old2 (alive); now founds "x"
  auto& old1 = f.company("old1", Date{1995, 1, 1});
  old1.closed = Date{2000, 1, 1};
  f.company("old2", Date{1996, 1, 1});
  f.company("x", Date{2005, 1, 1});
  FounderRecord p1;
  p1.person_id = "p1";
  p1.foundings = {{"old1", Date{1995, 1, 1}}, {"old2", Date{1996, 1, 1}}, {"x", Date{2005, 1, 1}}};
  f.b.founders.push_back(p1);
  // founder p2: first-time founder of x
  FounderRecord p2;
  p2.person_id = "p2";
  p2.foundings = {{"x", Date{2005, 1, 1}}};
  f.b.founders.push_back(p2);
  auto s = f.freeze();
  auto ff = founder_factors(s, *s.company_index("x"), Date{2009, 1, 1});
  EXPECT_DOUBLE_EQ(ff.mean_fail, 0.5);  // p2 contributes nothing
  EXPECT_DOUBLE_EQ(ff.max_fail, 0.5);

  // p1's very first company: no prior foundings -> Missing
  auto ff_old1 = founder_factors(s, *s.company_index("old1"), Date{2009, 1, 1});
  EXPECT_TRUE(is_missing(ff_old1.mean_fail));
}

TEST(FeatureMatrix, ShapeOrderAndConsistency) {
  FixtureBuilder f;
  auto& a = f.company("a", Date{2004, 1, 1});
  a.province = "P";
  a.city = "C";
  a.industries = {"ai"};
  f.round("r1", "a", Date{2005, 6, 1}, 2e6, {"v1"});
  auto s = f.freeze();
  auto samples = build_samples(s);
  ASSERT_FALSE(samples.empty());
  Dataset d = feature_matrix(s, samples);
  EXPECT_EQ(d.n_rows(), samples.size());
  EXPECT_EQ(d.n_features(), kNumFactors);
  ASSERT_EQ(d.feature_names.size(), kNumFactors);
  EXPECT_EQ(d.feature_names[0], "found_year_offset");
  EXPECT_EQ(d.feature_names[18], "max_founder_fail_fraction");

  // cell-by-cell agreement with the factor sub-ops
  for (size_t i = 0; i < samples.size(); ++i) {
    auto x = compute_factors(s, samples[i].company_index, samples[i].window.t_s);
    for (size_t j = 0; j < kNumFactors; ++j) {
      if (is_missing(x[j]))
        EXPECT_TRUE(is_missing(d.at(i, j)));
      else
        EXPECT_DOUBLE_EQ(d.at(i, j), x[j]);
    }
    EXPECT_EQ(d.labels[i], samples[i].label);
  }
}

TEST(FeatureMatrix, MaxGeMeanWherePresent) {
  FixtureBuilder f;
  for (int i = 0; i < 8; ++i) {
    auto& c = f.company("c" + std::to_string(i), Date{2000 + i % 5, 1, 1});
    c.province = i % 2 ? "P1" : "P2";
    c.city = i % 3 ? "C1" : "C2";
    c.industries = i % 2 ? std::vector<std::string>{"ai", "fintech"}
                         : std::vector<std::string>{"biotech"};
    f.round("r" + std::to_string(i), "c" + std::to_string(i), Date{2001 + i % 5, 6, 1},
            i % 2 ? std::optional<double>(5e5 * i) : std::nullopt,
            {"v" + std::to_string(i % 3)});
  }
  auto s = f.freeze();
  Dataset d = feature_matrix(s, build_samples(s));
  const std::pair<size_t, size_t> pairs[] = {
      {kMeanIndustryProsperityProvince, kMaxIndustryProsperityProvince},
      {kMeanIndustryProsperityCity, kMaxIndustryProsperityCity},
      {kMeanInvestorIpoFraction, kMaxInvestorIpoFraction},
      {kMeanInvestorAcqFraction, kMaxInvestorAcqFraction},
      {kMeanFounderFailFraction, kMaxFounderFailFraction},
  };
  for (size_t i = 0; i < d.n_rows(); ++i) {
    for (auto [mean_j, max_j] : pairs) {
      const double mean = d.at(i, mean_j), mx = d.at(i, max_j);
      EXPECT_EQ(is_missing(mean), is_missing(mx));
      if (!is_missing(mean)) EXPECT_GE(mx, mean - 1e-12);
    }
    // fractions bounded in [0,1]; counts non-negative
    for (size_t j : {kMeanInvestorIpoFraction, kMaxInvestorIpoFraction, kMeanInvestorAcqFraction,
                     kMaxInvestorAcqFraction, kMeanFounderFailFraction, kMaxFounderFailFraction}) {
      const double v = d.at(i, j);
      if (is_missing(v)) continue;
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (size_t j : {kNewsCount, kNumFundingRounds, kCompanyAgeMonths, kMacroeconomy}) {
      if (!is_missing(d.at(i, j))) EXPECT_GE(d.at(i, j), 0.0);
    }
    if (!is_missing(d.at(i, kTotalRaisedUsd))) EXPECT_GE(d.at(i, kTotalRaisedUsd), 0.0);
  }
}

// Temporal hygiene: deleting any event dated at or after t_s changes nothing.
TEST(FeatureMatrix, PostWindowEventsDoNotLeak) {
  FixtureBuilder f;
  auto& a = f.company("a", Date{2004, 1, 1});
  a.province = "P";
  a.city = "C";
  a.industries = {"ai"};
  f.round("r1", "a", Date{2005, 6, 1}, 2e6, {"v1"});
  auto base_store = f.freeze();
  Date ts{2009, 1, 1};
  auto base = compute_factors(base_store, *base_store.company_index("a"), ts);

  // same fixture plus post-t_s events of every kind
  FixtureBuilder g;
  auto& a2 = g.company("a", Date{2004, 1, 1});
  a2.province = "P";
  a2.city = "C";
  a2.industries = {"ai"};
  g.round("r1", "a", Date{2005, 6, 1}, 2e6, {"v1"});
  g.round("r2", "a", Date{2009, 1, 1}, 9e6, {"v2"});  // exactly t_s: excluded
  auto& later = g.company("later", Date{2009, 6, 1});
  later.province = "P";
  later.city = "C";
  later.industries = {"ai"};
  g.b.news.push_back(NewsItem{"a", Date{2009, 1, 1}});
  g.b.exits.push_back(ExitEvent{"a", ExitKind::IPO, Date{2010, 1, 1}});
  auto perturbed_store = g.freeze();
  auto perturbed =
      compute_factors(perturbed_store, *perturbed_store.company_index("a"), ts);

  for (size_t j = 0; j < kNumFactors; ++j) {
    // macroeconomy counts by founding year, not by t_s; "later" was founded in
    // 2009 so it does not share a's 2004 cohort either.
    if (is_missing(base[j]))
      EXPECT_TRUE(is_missing(perturbed[j])) << factor_names()[j];
    else
      EXPECT_DOUBLE_EQ(base[j], perturbed[j]) << factor_names()[j];
  }
}

}  // namespace
}  // namespace nextround
