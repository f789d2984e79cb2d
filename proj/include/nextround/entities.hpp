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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "nextround/date.hpp"

namespace nextround {

enum class RoundType : uint8_t {
  Seed,
  A,
  B,
  C,
  D,
  E,
  F,
  G,
  H,
  I,
  J,
  OtherEquity,
  Debt,
  NonEquity,
  Corporate,
  Convertible,
  PreSeed,
  Unknown,
};

inline bool is_lettered_round(RoundType t) { return t >= RoundType::A && t <= RoundType::J; }

// Position in the Seed -> A -> ... -> J ladder; -1 for everything else.
inline int lettered_rank(RoundType t) {
  if (t == RoundType::Seed) return 0;
  if (is_lettered_round(t)) return 1 + static_cast<int>(t) - static_cast<int>(RoundType::A);
  return -1;
}

inline std::string_view round_type_name(RoundType t) {
  switch (t) {
    case RoundType::Seed: return "seed";
    case RoundType::A: return "series_a";
    case RoundType::B: return "series_b";
    case RoundType::C: return "series_c";
    case RoundType::D: return "series_d";
    case RoundType::E: return "series_e";
    case RoundType::F: return "series_f";
    case RoundType::G: return "series_g";
    case RoundType::H: return "series_h";
    case RoundType::I: return "series_i";
    case RoundType::J: return "series_j";
    case RoundType::OtherEquity: return "other_equity";
    case RoundType::Debt: return "debt_financing";
    case RoundType::NonEquity: return "non_equity_assistance";
    case RoundType::Corporate: return "corporate_round";
    case RoundType::Convertible: return "convertible_note";
    case RoundType::PreSeed: return "pre_seed";
    case RoundType::Unknown: return "unknown";
  }
  return "unknown";
}

// Unknown strings become Unknown instead of failing the load; the lettered
// ordering only matters to interval stats and stage filters.
inline RoundType parse_round_type(std::string_view s) {
  if (s == "seed") return RoundType::Seed;
  if (s == "pre_seed") return RoundType::PreSeed;
  if (s.size() == 8 && s.rfind("series_", 0) == 0) {
    char c = s[7];
    if (c >= 'a' && c <= 'j')
      return static_cast<RoundType>(static_cast<int>(RoundType::A) + (c - 'a'));
  }
  if (s == "debt_financing") return RoundType::Debt;
  if (s == "non_equity_assistance" || s == "grant") return RoundType::NonEquity;
  if (s == "corporate_round") return RoundType::Corporate;
  if (s == "convertible_note") return RoundType::Convertible;
  if (s == "angel" || s == "venture" || s == "private_equity" || s == "equity_crowdfunding" ||
      s == "post_ipo_equity" || s == "secondary_market" || s == "other_equity")
    return RoundType::OtherEquity;
  return RoundType::Unknown;
}

struct Company {
  std::string id;
  std::string name;
  std::optional<Date> founded;  // guaranteed present after filter_companies
  std::optional<std::string> province;
  std::optional<std::string> city;
  std::vector<std::string> industries;  // sorted, unique
  std::optional<Date> closed;
};

struct FundingRound {
  std::string id;
  std::string company_id;
  RoundType type = RoundType::Unknown;
  Date announced;
  std::optional<double> raised_usd;
  std::vector<std::string> investor_ids;  // sorted, unique
};

enum class ExitKind : uint8_t { IPO, Acquisition };

struct ExitEvent {
  std::string company_id;
  ExitKind kind = ExitKind::IPO;
  Date date;
};

struct Founding {
  std::string company_id;
  Date company_founded;
};

struct FounderRecord {
  std::string person_id;
  std::vector<Founding> foundings;  // sorted by (company_founded, company_id)
};

struct NewsItem {
  std::string company_id;
  Date date;
};

// One investor's deal: which company, when.
struct InvestorDeal {
  size_t company_index;
  Date date;
};

// Per-area chronology used by the prosperity factors: how many companies in
// the area were founded / closed strictly before a date.
struct AreaTimeline {
  std::vector<Date> founded;  // sorted
  std::vector<Date> closed;   // sorted; only companies that have a closed date

  int active_before(const Date& ts) const {
    auto nf = std::lower_bound(founded.begin(), founded.end(), ts) - founded.begin();
    auto nc = std::lower_bound(closed.begin(), closed.end(), ts) - closed.begin();
    return static_cast<int>(nf - nc);
  }
};

// Immutable indexed view over a Crunchbase-style export. Built once by
// EntityStoreBuilder; safe to share across threads afterwards.
class EntityStore {
 public:
  const std::vector<Company>& companies() const { return companies_; }
  const std::vector<FundingRound>& rounds() const { return rounds_; }
  const std::vector<ExitEvent>& exits() const { return exits_; }
  const std::vector<FounderRecord>& founders() const { return founders_; }
  const std::vector<NewsItem>& news() const { return news_; }

  const Company* find_company(std::string_view id) const {
    auto it = company_by_id_.find(std::string(id));
    return it == company_by_id_.end() ? nullptr : &companies_[it->second];
  }

  std::optional<size_t> company_index(std::string_view id) const {
    auto it = company_by_id_.find(std::string(id));
    if (it == company_by_id_.end()) return std::nullopt;
    return it->second;
  }

  // Round indices per company, sorted by (announced, round id).
  const std::vector<size_t>& rounds_of(size_t company_index) const {
    return rounds_by_company_[company_index];
  }

  const std::optional<Date>& ipo_date(size_t company_index) const {
    return ipo_by_company_[company_index];
  }

  // Sorted acquisition dates (possibly several per company in raw exports).
  const std::vector<Date>& acquisition_dates(size_t company_index) const {
    return acquisitions_by_company_[company_index];
  }

  const std::vector<Date>& news_dates(size_t company_index) const {
    return news_by_company_[company_index];
  }

  // Founder indices per company.
  const std::vector<size_t>& founders_of(size_t company_index) const {
    return founders_by_company_[company_index];
  }

  // Deals per investor id, sorted by (date, company index).
  const std::vector<InvestorDeal>* deals_of(const std::string& investor_id) const {
    auto it = deals_by_investor_.find(investor_id);
    return it == deals_by_investor_.end() ? nullptr : &it->second;
  }

  int companies_founded_in_year(int year) const {
    auto it = companies_by_founding_year_.find(year);
    return it == companies_by_founding_year_.end() ? 0 : static_cast<int>(it->second);
  }

  const AreaTimeline* province_timeline(const std::string& province) const {
    auto it = province_timelines_.find(province);
    return it == province_timelines_.end() ? nullptr : &it->second;
  }
  const AreaTimeline* city_timeline(const std::string& city) const {
    auto it = city_timelines_.find(city);
    return it == city_timelines_.end() ? nullptr : &it->second;
  }
  const AreaTimeline* province_industry_timeline(const std::string& province,
                                                 const std::string& tag) const {
    auto it = province_industry_timelines_.find(province + '\x1f' + tag);
    return it == province_industry_timelines_.end() ? nullptr : &it->second;
  }
  const AreaTimeline* city_industry_timeline(const std::string& city,
                                             const std::string& tag) const {
    auto it = city_industry_timelines_.find(city + '\x1f' + tag);
    return it == city_industry_timelines_.end() ? nullptr : &it->second;
  }

 private:
  friend class EntityStoreBuilder;

  std::vector<Company> companies_;
  std::vector<FundingRound> rounds_;
  std::vector<ExitEvent> exits_;
  std::vector<FounderRecord> founders_;
  std::vector<NewsItem> news_;

  std::unordered_map<std::string, size_t> company_by_id_;
  std::vector<std::vector<size_t>> rounds_by_company_;
  std::vector<std::optional<Date>> ipo_by_company_;
  std::vector<std::vector<Date>> acquisitions_by_company_;
  std::vector<std::vector<Date>> news_by_company_;
  std::vector<std::vector<size_t>> founders_by_company_;
  std::unordered_map<std::string, std::vector<InvestorDeal>> deals_by_investor_;
  std::unordered_map<int, size_t> companies_by_founding_year_;
  std::unordered_map<std::string, AreaTimeline> province_timelines_;
  std::unordered_map<std::string, AreaTimeline> city_timelines_;
  std::unordered_map<std::string, AreaTimeline> province_industry_timelines_;
  std::unordered_map<std::string, AreaTimeline> city_industry_timelines_;
};

// Single-writer construction: collect base records, then freeze() sorts them
// canonically and builds every derived index.
class EntityStoreBuilder {
 public:
  std::vector<Company> companies;
  std::vector<FundingRound> rounds;
  std::vector<ExitEvent> exits;
  std::vector<FounderRecord> founders;
  std::vector<NewsItem> news;

  EntityStore freeze() && {
    EntityStore s;
    s.companies_ = std::move(companies);
    s.rounds_ = std::move(rounds);
    s.exits_ = std::move(exits);
    s.founders_ = std::move(founders);
    s.news_ = std::move(news);

    std::sort(s.companies_.begin(), s.companies_.end(),
              [](const Company& a, const Company& b) { return a.id < b.id; });
    std::sort(s.rounds_.begin(), s.rounds_.end(),
              [](const FundingRound& a, const FundingRound& b) { return a.id < b.id; });
    std::sort(s.exits_.begin(), s.exits_.end(), [](const ExitEvent& a, const ExitEvent& b) {
      return std::tie(a.company_id, a.date, a.kind) < std::tie(b.company_id, b.date, b.kind);
    });
    std::sort(s.founders_.begin(), s.founders_.end(),
              [](const FounderRecord& a, const FounderRecord& b) {
                return a.person_id < b.person_id;
              });
    std::sort(s.news_.begin(), s.news_.end(), [](const NewsItem& a, const NewsItem& b) {
      return std::tie(a.company_id, a.date) < std::tie(b.company_id, b.date);
    });

    const size_t n = s.companies_.size();
    s.company_by_id_.reserve(n);
    for (size_t i = 0; i < n; ++i) s.company_by_id_[s.companies_[i].id] = i;

    s.rounds_by_company_.resize(n);
    s.ipo_by_company_.resize(n);
    s.acquisitions_by_company_.resize(n);
    s.news_by_company_.resize(n);
    s.founders_by_company_.resize(n);

    for (size_t r = 0; r < s.rounds_.size(); ++r) {
      const auto& round = s.rounds_[r];
      auto it = s.company_by_id_.find(round.company_id);
      if (it == s.company_by_id_.end()) continue;
      s.rounds_by_company_[it->second].push_back(r);
      for (const auto& inv : round.investor_ids)
        s.deals_by_investor_[inv].push_back(InvestorDeal{it->second, round.announced});
    }
    for (auto& [inv, deals] : s.deals_by_investor_) {
      std::sort(deals.begin(), deals.end(), [](const InvestorDeal& a, const InvestorDeal& b) {
        return std::tie(a.date, a.company_index) < std::tie(b.date, b.company_index);
      });
    }
    for (size_t c = 0; c < n; ++c) {
      auto& rc = s.rounds_by_company_[c];
      std::sort(rc.begin(), rc.end(), [&](size_t a, size_t b) {
        return std::tie(s.rounds_[a].announced, s.rounds_[a].id) <
               std::tie(s.rounds_[b].announced, s.rounds_[b].id);
      });
    }

    for (const auto& e : s.exits_) {
      auto it = s.company_by_id_.find(e.company_id);
      if (it == s.company_by_id_.end()) continue;
      if (e.kind == ExitKind::IPO) {
        auto& slot = s.ipo_by_company_[it->second];
        if (!slot || e.date < *slot) slot = e.date;  // at most one IPO per company
      } else {
        s.acquisitions_by_company_[it->second].push_back(e.date);
      }
    }
    for (auto& v : s.acquisitions_by_company_) std::sort(v.begin(), v.end());

    for (const auto& item : s.news_) {
      auto it = s.company_by_id_.find(item.company_id);
      if (it != s.company_by_id_.end()) s.news_by_company_[it->second].push_back(item.date);
    }
    for (auto& v : s.news_by_company_) std::sort(v.begin(), v.end());

    for (size_t f = 0; f < s.founders_.size(); ++f) {
      auto& rec = s.founders_[f];
      std::sort(rec.foundings.begin(), rec.foundings.end(),
                [](const Founding& a, const Founding& b) {
                  return std::tie(a.company_founded, a.company_id) <
                         std::tie(b.company_founded, b.company_id);
                });
      for (const auto& founding : rec.foundings) {
        auto it = s.company_by_id_.find(founding.company_id);
        if (it != s.company_by_id_.end()) s.founders_by_company_[it->second].push_back(f);
      }
    }

    for (const auto& c : s.companies_) {
      if (!c.founded) continue;
      s.companies_by_founding_year_[c.founded->year]++;
      if (c.province) {
        auto& t = s.province_timelines_[*c.province];
        t.founded.push_back(*c.founded);
        if (c.closed) t.closed.push_back(*c.closed);
        for (const auto& tag : c.industries) {
          auto& ti = s.province_industry_timelines_[*c.province + '\x1f' + tag];
          ti.founded.push_back(*c.founded);
          if (c.closed) ti.closed.push_back(*c.closed);
        }
      }
      if (c.city) {
        auto& t = s.city_timelines_[*c.city];
        t.founded.push_back(*c.founded);
        if (c.closed) t.closed.push_back(*c.closed);
        for (const auto& tag : c.industries) {
          auto& ti = s.city_industry_timelines_[*c.city + '\x1f' + tag];
          ti.founded.push_back(*c.founded);
          if (c.closed) ti.closed.push_back(*c.closed);
        }
      }
    }
    auto sort_timelines = [](auto& m) {
      for (auto& [k, t] : m) {
        std::sort(t.founded.begin(), t.founded.end());
        std::sort(t.closed.begin(), t.closed.end());
      }
    };
    sort_timelines(s.province_timelines_);
    sort_timelines(s.city_timelines_);
    sort_timelines(s.province_industry_timelines_);
    sort_timelines(s.city_industry_timelines_);

    return s;
  }
};

}  // namespace nextround
