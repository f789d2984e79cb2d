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
#include <array>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nextround/dataset.hpp"
#include "nextround/entities.hpp"
#include "nextround/parallel.hpp"
#include "nextround/windows.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

inline constexpr size_t kNumFactors = 19;

enum Factor : size_t {
  kFoundYearOffset = 0,
  kMacroeconomy,
  kCompanyAgeMonths,
  kNewsCount,
  kMonthlyAvgNews,
  kProvinceProsperity,
  kCityProsperity,
  kMeanIndustryProsperityProvince,
  kMaxIndustryProsperityProvince,
  kMeanIndustryProsperityCity,
  kMaxIndustryProsperityCity,
  kNumFundingRounds,
  kTotalRaisedUsd,
  kMeanInvestorIpoFraction,
  kMaxInvestorIpoFraction,
  kMeanInvestorAcqFraction,
  kMaxInvestorAcqFraction,
  kMeanFounderFailFraction,
  kMaxFounderFailFraction,
};

inline const std::array<std::string, kNumFactors>& factor_names() {
  static const std::array<std::string, kNumFactors> names = {
      "found_year_offset",
      "macroeconomy",
      "company_age_months",
      "news_count",
      "monthly_avg_news",
      "province_prosperity",
      "city_prosperity",
      "mean_industry_prosperity_province",
      "max_industry_prosperity_province",
      "mean_industry_prosperity_city",
      "max_industry_prosperity_city",
      "num_funding_rounds",
      "total_raised_usd",
      "mean_investor_ipo_fraction",
      "max_investor_ipo_fraction",
      "mean_investor_acq_fraction",
      "max_investor_acq_fraction",
      "mean_founder_fail_fraction",
      "max_founder_fail_fraction",
  };
  return names;
}

// Slot name -> human definition, for report generation.
inline nlohmann::json factor_dictionary() {
  return {
      {"found_year_offset", "years from 1990 to the founding year"},
      {"macroeconomy", "companies founded in the same year as the company"},
      {"company_age_months", "months from founding to the window start"},
      {"news_count", "news items strictly before the window start"},
      {"monthly_avg_news", "news per month of company age (news count when age is 0)"},
      {"province_prosperity", "active companies headquartered in the same province"},
      {"city_prosperity", "active companies headquartered in the same city"},
      {"mean_industry_prosperity_province",
       "mean, over the company's industries, of active same-province companies sharing the tag"},
      {"max_industry_prosperity_province",
       "max, over the company's industries, of active same-province companies sharing the tag"},
      {"mean_industry_prosperity_city",
       "mean, over the company's industries, of active same-city companies sharing the tag"},
      {"max_industry_prosperity_city",
       "max, over the company's industries, of active same-city companies sharing the tag"},
      {"num_funding_rounds", "funding rounds announced strictly before the window start"},
      {"total_raised_usd", "total USD raised strictly before the window start"},
      {"mean_investor_ipo_fraction", "mean IPO exit fraction across the company's investors"},
      {"max_investor_ipo_fraction", "max IPO exit fraction across the company's investors"},
      {"mean_investor_acq_fraction",
       "mean acquisition exit fraction across the company's investors"},
      {"max_investor_acq_fraction", "max acquisition exit fraction across the company's investors"},
      {"mean_founder_fail_fraction", "mean failed fraction of founders' earlier companies"},
      {"max_founder_fail_fraction", "max failed fraction of founders' earlier companies"},
  };
}

struct FeatureConfig {
  // Investor track records count distinct portfolio companies by default;
  // the per-deal alternative counts every (round, investor) participation.
  bool investor_fractions_per_deal = false;
  int threads = 1;
};

inline int found_year_offset(const Company& c) { return c.founded->year - 1990; }

inline int macroeconomy(const EntityStore& store, const Company& c) {
  return store.companies_founded_in_year(c.founded->year);
}

inline int company_age_months(const Company& c, const Date& ts) {
  return months_between(ts, *c.founded);
}

struct NewsFactors {
  int news_count = 0;
  double monthly_avg = 0;
};

inline NewsFactors news_factors(const EntityStore& store, size_t company_index, const Date& ts) {
  const auto& dates = store.news_dates(company_index);
  const auto n = std::lower_bound(dates.begin(), dates.end(), ts) - dates.begin();
  NewsFactors f;
  f.news_count = static_cast<int>(n);
  const int age = company_age_months(store.companies()[company_index], ts);
  f.monthly_avg = age > 0 ? static_cast<double>(n) / age : static_cast<double>(n);
  return f;
}

// Companies in the area founded strictly before ts and not closed strictly
// before ts. Missing when the company has no such area field.
inline double area_prosperity(const AreaTimeline* timeline, const Date& ts) {
  if (!timeline) return 0;
  return timeline->active_before(ts);
}

struct IndustryProsperity {
  double mean_province = kMissing;
  double max_province = kMissing;
  double mean_city = kMissing;
  double max_city = kMissing;
};

inline IndustryProsperity industry_prosperity(const EntityStore& store, const Company& c,
                                              const Date& ts) {
  IndustryProsperity out;
  if (c.industries.empty()) return out;
  if (c.province) {
    double sum = 0, mx = 0;
    for (const auto& tag : c.industries) {
      double v = area_prosperity(store.province_industry_timeline(*c.province, tag), ts);
      sum += v;
      mx = std::max(mx, v);
    }
    out.mean_province = sum / static_cast<double>(c.industries.size());
    out.max_province = mx;
  }
  if (c.city) {
    double sum = 0, mx = 0;
    for (const auto& tag : c.industries) {
      double v = area_prosperity(store.city_industry_timeline(*c.city, tag), ts);
      sum += v;
      mx = std::max(mx, v);
    }
    out.mean_city = sum / static_cast<double>(c.industries.size());
    out.max_city = mx;
  }
  return out;
}

struct FundingFactors {
  int num_rounds = 0;
  double total_raised = kMissing;  // Missing only when no prior round has an amount
};

inline FundingFactors funding_factors(const EntityStore& store, size_t company_index,
                                      const Date& ts) {
  FundingFactors f;
  double total = 0;
  bool any_amount = false;
  for (size_t r : store.rounds_of(company_index)) {
    const auto& round = store.rounds()[r];
    if (!(round.announced < ts)) break;
    ++f.num_rounds;
    if (round.raised_usd) {
      total += *round.raised_usd;
      any_amount = true;
    }
  }
  if (any_amount) f.total_raised = total;
  return f;
}

struct TrackRecord {
  double ipo_fraction = kMissing;
  double acq_fraction = kMissing;
};

// Exit record of one investor over its pre-ts portfolio. The denominator is
// distinct portfolio companies (or raw deals with the per-deal flag).
inline TrackRecord investor_track_record(const EntityStore& store, const std::string& investor_id,
                                         const Date& ts, const FeatureConfig& cfg = {}) {
  const auto* deals = store.deals_of(investor_id);
  TrackRecord tr;
  if (!deals) return tr;
  size_t denom = 0, ipo = 0, acq = 0;
  std::unordered_set<size_t> seen;
  for (const auto& deal : *deals) {
    if (!(deal.date < ts)) break;  // deals are date-sorted
    if (!cfg.investor_fractions_per_deal && !seen.insert(deal.company_index).second) continue;
    ++denom;
    const auto& ipo_date = store.ipo_date(deal.company_index);
    if (ipo_date && *ipo_date < ts) ++ipo;
    const auto& acqs = store.acquisition_dates(deal.company_index);
    if (!acqs.empty() && acqs.front() < ts) ++acq;
  }
  if (denom == 0) return tr;
  tr.ipo_fraction = static_cast<double>(ipo) / static_cast<double>(denom);
  tr.acq_fraction = static_cast<double>(acq) / static_cast<double>(denom);
  return tr;
}

struct InvestorFactors {
  double mean_ipo = kMissing;
  double max_ipo = kMissing;
  double mean_acq = kMissing;
  double max_acq = kMissing;
};

inline InvestorFactors investor_factors(const EntityStore& store, size_t company_index,
                                        const Date& ts, const FeatureConfig& cfg = {}) {
  std::vector<std::string> investors;
  for (size_t r : store.rounds_of(company_index)) {
    const auto& round = store.rounds()[r];
    if (!(round.announced < ts)) break;
    investors.insert(investors.end(), round.investor_ids.begin(), round.investor_ids.end());
  }
  std::sort(investors.begin(), investors.end());
  investors.erase(std::unique(investors.begin(), investors.end()), investors.end());

  InvestorFactors out;
  double sum_ipo = 0, sum_acq = 0, max_ipo = 0, max_acq = 0;
  size_t defined = 0;
  for (const auto& inv : investors) {
    TrackRecord tr = investor_track_record(store, inv, ts, cfg);
    if (is_missing(tr.ipo_fraction)) continue;
    ++defined;
    sum_ipo += tr.ipo_fraction;
    sum_acq += tr.acq_fraction;
    max_ipo = std::max(max_ipo, tr.ipo_fraction);
    max_acq = std::max(max_acq, tr.acq_fraction);
  }
  if (defined == 0) return out;
  out.mean_ipo = sum_ipo / static_cast<double>(defined);
  out.max_ipo = max_ipo;
  out.mean_acq = sum_acq / static_cast<double>(defined);
  out.max_acq = max_acq;
  return out;
}

struct FounderFactors {
  double mean_fail = kMissing;
  double max_fail = kMissing;
};

// Per founder: fraction of companies founded before this one that closed
// before ts. Founders with no earlier foundings contribute nothing.
inline FounderFactors founder_factors(const EntityStore& store, size_t company_index,
                                      const Date& ts) {
  const Company& c = store.companies()[company_index];
  FounderFactors out;
  double sum = 0, mx = 0;
  size_t defined = 0;
  for (size_t f : store.founders_of(company_index)) {
    const auto& rec = store.founders()[f];
    size_t prior = 0, failed = 0;
    for (const auto& founding : rec.foundings) {
      if (!(founding.company_founded < *c.founded)) continue;
      ++prior;
      auto idx = store.company_index(founding.company_id);
      if (!idx) continue;
      const auto& past = store.companies()[*idx];
      if (past.closed && *past.closed < ts) ++failed;
    }
    if (prior == 0) continue;
    double frac = static_cast<double>(failed) / static_cast<double>(prior);
    ++defined;
    sum += frac;
    mx = std::max(mx, frac);
  }
  if (defined == 0) return out;
  out.mean_fail = sum / static_cast<double>(defined);
  out.max_fail = mx;
  return out;
}

// All 19 factors of one (company, t_s) pair.
inline std::array<double, kNumFactors> compute_factors(const EntityStore& store,
                                                       size_t company_index, const Date& ts,
                                                       const FeatureConfig& cfg = {}) {
  const Company& c = store.companies()[company_index];
  std::array<double, kNumFactors> x;
  x.fill(kMissing);

  x[kFoundYearOffset] = found_year_offset(c);
  x[kMacroeconomy] = macroeconomy(store, c);
  x[kCompanyAgeMonths] = company_age_months(c, ts);
  NewsFactors news = news_factors(store, company_index, ts);
  x[kNewsCount] = news.news_count;
  x[kMonthlyAvgNews] = news.monthly_avg;
  if (c.province) x[kProvinceProsperity] = area_prosperity(store.province_timeline(*c.province), ts);
  if (c.city) x[kCityProsperity] = area_prosperity(store.city_timeline(*c.city), ts);
  IndustryProsperity ind = industry_prosperity(store, c, ts);
  x[kMeanIndustryProsperityProvince] = ind.mean_province;
  x[kMaxIndustryProsperityProvince] = ind.max_province;
  x[kMeanIndustryProsperityCity] = ind.mean_city;
  x[kMaxIndustryProsperityCity] = ind.max_city;
  FundingFactors funding = funding_factors(store, company_index, ts);
  x[kNumFundingRounds] = funding.num_rounds;
  x[kTotalRaisedUsd] = funding.total_raised;
  InvestorFactors inv = investor_factors(store, company_index, ts, cfg);
  x[kMeanInvestorIpoFraction] = inv.mean_ipo;
  x[kMaxInvestorIpoFraction] = inv.max_ipo;
  x[kMeanInvestorAcqFraction] = inv.mean_acq;
  x[kMaxInvestorAcqFraction] = inv.max_acq;
  FounderFactors founder = founder_factors(store, company_index, ts);
  x[kMeanFounderFailFraction] = founder.mean_fail;
  x[kMaxFounderFailFraction] = founder.max_fail;
  return x;
}

// One row per sample, in sample order. Rows are computed in parallel; output
// does not depend on the thread count.
inline Dataset feature_matrix(const EntityStore& store, const std::vector<SampleEvent>& samples,
                              const FeatureConfig& cfg = {}) {
  Dataset d;
  d.feature_names.assign(factor_names().begin(), factor_names().end());
  d.values.resize(samples.size() * kNumFactors);
  d.labels.resize(samples.size());
  d.weights.assign(samples.size(), 1.0);
  parallel_for(samples.size(), cfg.threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      auto x = compute_factors(store, samples[i].company_index, samples[i].window.t_s, cfg);
      std::copy(x.begin(), x.end(), d.values.begin() + i * kNumFactors);
      d.labels[i] = samples[i].label;
    }
  });
  return d;
}

}  // namespace nextround
