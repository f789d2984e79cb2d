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
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/entities.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

struct FileLoadCounts {
  size_t rows_read = 0;
  size_t rows_loaded = 0;
  size_t malformed = 0;        // unparseable dates / numbers / missing key fields
  size_t duplicates = 0;       // duplicate primary key, first occurrence kept
  size_t integrity_drops = 0;  // references to entities that are not in the store
};

struct LoadReport {
  std::map<std::string, FileLoadCounts> files;

  size_t warnings() const {
    size_t w = 0;
    for (const auto& [name, c] : files) w += c.malformed + c.duplicates + c.integrity_drops;
    return w;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (const auto& [name, c] : files) {
      j[name] = {{"rows_read", c.rows_read},
                 {"rows_loaded", c.rows_loaded},
                 {"malformed", c.malformed},
                 {"duplicates", c.duplicates},
                 {"integrity_drops", c.integrity_drops}};
    }
    return j;
  }
};

struct FilterReport {
  size_t removed_missing_founded = 0;
  size_t removed_pre_1990 = 0;
  size_t dependent_rounds_removed = 0;
  size_t dependent_exits_removed = 0;
  size_t dependent_news_removed = 0;
  size_t dependent_foundings_removed = 0;

  nlohmann::json to_json() const {
    return {{"removed_missing_founded", removed_missing_founded},
            {"removed_pre_1990", removed_pre_1990},
            {"dependent_rounds_removed", dependent_rounds_removed},
            {"dependent_exits_removed", dependent_exits_removed},
            {"dependent_news_removed", dependent_news_removed},
            {"dependent_foundings_removed", dependent_foundings_removed}};
  }
};

namespace detail {

inline std::optional<double> parse_amount(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v) || v < 0) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_tags(std::string_view list) {
  std::vector<std::string> tags;
  size_t start = 0;
  while (start <= list.size()) {
    size_t end = list.find('|', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view tag = list.substr(start, end - start);
    // trim surrounding spaces
    while (!tag.empty() && tag.front() == ' ') tag.remove_prefix(1);
    while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
    if (!tag.empty()) tags.emplace_back(tag);
    if (end == list.size()) break;
    start = end + 1;
  }
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

struct ColumnMap {
  std::vector<int> idx;
  const CsvTable* table;

  // Throws when a required column is absent; fatal per the load contract.
  ColumnMap(const CsvTable& t, const std::vector<std::string>& names, const std::string& file)
      : table(&t) {
    for (const auto& name : names) {
      int i = t.column(name);
      if (i < 0) throw std::runtime_error(file + ": missing required column '" + name + "'");
      idx.push_back(i);
    }
  }

  // Field k of a row, or empty when the row is ragged.
  std::string_view get(const std::vector<std::string>& row, size_t k) const {
    int i = idx[k];
    if (i < 0 || static_cast<size_t>(i) >= row.size()) return {};
    return row[static_cast<size_t>(i)];
  }
};

}  // namespace detail

// Parses the export directory into an immutable store. Rows that fail
// validation or referential integrity are dropped and counted, never fatal;
// a missing required file is fatal.
inline EntityStore load_export(const std::string& directory, LoadReport* report = nullptr) {
  using detail::ColumnMap;
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  EntityStoreBuilder b;
  std::unordered_set<std::string> company_ids;
  std::unordered_map<std::string, std::string> round_company;  // round id -> company id
  std::unordered_map<std::string, std::vector<std::string>> round_investors;

  {
    auto t = read_csv_file(directory + "/organizations.csv");
    ColumnMap cols(t, {"uuid", "name", "founded_on", "closed_on", "region", "city", "category_list"},
                   "organizations.csv");
    auto& c = rep.files["organizations.csv"];
    c.rows_read = t.rows.size();
    for (const auto& row : t.rows) {
      std::string id(cols.get(row, 0));
      if (id.empty()) {
        ++c.malformed;
        continue;
      }
      std::string_view founded_s = cols.get(row, 2);
      std::optional<Date> founded;
      if (!founded_s.empty()) {
        founded = parse_date(founded_s);
        if (!founded) {
          ++c.malformed;
          continue;
        }
      }
      std::string_view closed_s = cols.get(row, 3);
      std::optional<Date> closed;
      if (!closed_s.empty()) {
        closed = parse_date(closed_s);
        if (!closed) {
          ++c.malformed;
          continue;
        }
      }
      if (!company_ids.insert(id).second) {
        ++c.duplicates;
        continue;
      }
      Company comp;
      comp.id = std::move(id);
      comp.name = std::string(cols.get(row, 1));
      comp.founded = founded;
      comp.closed = closed;
      std::string_view region = cols.get(row, 4);
      std::string_view city = cols.get(row, 5);
      if (!region.empty()) comp.province = std::string(region);
      if (!city.empty()) comp.city = std::string(city);
      comp.industries = detail::split_tags(cols.get(row, 6));
      b.companies.push_back(std::move(comp));
      ++c.rows_loaded;
    }
  }

  {
    auto t = read_csv_file(directory + "/funding_rounds.csv");
    ColumnMap cols(t, {"uuid", "org_uuid", "investment_type", "announced_on", "raised_amount_usd"},
                   "funding_rounds.csv");
    auto& c = rep.files["funding_rounds.csv"];
    c.rows_read = t.rows.size();
    std::unordered_set<std::string> round_ids;
    for (const auto& row : t.rows) {
      std::string id(cols.get(row, 0));
      std::string org(cols.get(row, 1));
      if (id.empty() || org.empty()) {
        ++c.malformed;
        continue;
      }
      auto announced = parse_date(cols.get(row, 3));
      if (!announced) {
        ++c.malformed;
        continue;
      }
      std::string_view amount_s = cols.get(row, 4);
      std::optional<double> amount;
      if (!amount_s.empty()) {
        amount = detail::parse_amount(amount_s);
        if (!amount) {
          ++c.malformed;
          continue;
        }
      }
      if (!company_ids.count(org)) {
        ++c.integrity_drops;
        continue;
      }
      if (!round_ids.insert(id).second) {
        ++c.duplicates;
        continue;
      }
      FundingRound r;
      r.id = id;
      r.company_id = org;
      r.type = parse_round_type(cols.get(row, 2));
      r.announced = *announced;
      r.raised_usd = amount;
      round_company.emplace(std::move(id), std::move(org));
      b.rounds.push_back(std::move(r));
      ++c.rows_loaded;
    }
  }

  {
    auto t = read_csv_file(directory + "/investments.csv");
    ColumnMap cols(t, {"funding_round_uuid", "investor_uuid"}, "investments.csv");
    auto& c = rep.files["investments.csv"];
    c.rows_read = t.rows.size();
    for (const auto& row : t.rows) {
      std::string round_id(cols.get(row, 0));
      std::string investor(cols.get(row, 1));
      if (round_id.empty() || investor.empty()) {
        ++c.malformed;
        continue;
      }
      if (!round_company.count(round_id)) {
        ++c.integrity_drops;
        continue;
      }
      round_investors[round_id].push_back(std::move(investor));
      ++c.rows_loaded;
    }
  }
  for (auto& r : b.rounds) {
    auto it = round_investors.find(r.id);
    if (it == round_investors.end()) continue;
    auto& inv = it->second;
    std::sort(inv.begin(), inv.end());
    inv.erase(std::unique(inv.begin(), inv.end()), inv.end());
    r.investor_ids = std::move(inv);
  }

  {
    auto t = read_csv_file(directory + "/acquisitions.csv");
    ColumnMap cols(t, {"acquiree_uuid", "acquired_on"}, "acquisitions.csv");
    auto& c = rep.files["acquisitions.csv"];
    c.rows_read = t.rows.size();
    for (const auto& row : t.rows) {
      std::string org(cols.get(row, 0));
      auto date = parse_date(cols.get(row, 1));
      if (org.empty() || !date) {
        ++c.malformed;
        continue;
      }
      if (!company_ids.count(org)) {
        ++c.integrity_drops;
        continue;
      }
      b.exits.push_back(ExitEvent{std::move(org), ExitKind::Acquisition, *date});
      ++c.rows_loaded;
    }
  }

  {
    auto t = read_csv_file(directory + "/ipos.csv");
    ColumnMap cols(t, {"org_uuid", "went_public_on"}, "ipos.csv");
    auto& c = rep.files["ipos.csv"];
    c.rows_read = t.rows.size();
    std::unordered_set<std::string> seen;
    for (const auto& row : t.rows) {
      std::string org(cols.get(row, 0));
      auto date = parse_date(cols.get(row, 1));
      if (org.empty() || !date) {
        ++c.malformed;
        continue;
      }
      if (!company_ids.count(org)) {
        ++c.integrity_drops;
        continue;
      }
      if (!seen.insert(org).second) {  // one IPO at most per company
        ++c.duplicates;
        continue;
      }
      b.exits.push_back(ExitEvent{std::move(org), ExitKind::IPO, *date});
      ++c.rows_loaded;
    }
  }

  {
    auto t = read_csv_file(directory + "/founders.csv");
    ColumnMap cols(t, {"person_uuid", "org_uuid"}, "founders.csv");
    auto& c = rep.files["founders.csv"];
    c.rows_read = t.rows.size();
    std::map<std::string, std::set<std::string>> person_orgs;
    for (const auto& row : t.rows) {
      std::string person(cols.get(row, 0));
      std::string org(cols.get(row, 1));
      if (person.empty() || org.empty()) {
        ++c.malformed;
        continue;
      }
      if (!company_ids.count(org)) {
        ++c.integrity_drops;
        continue;
      }
      if (!person_orgs[person].insert(org).second) {
        ++c.duplicates;
        continue;
      }
      ++c.rows_loaded;
    }
    std::unordered_map<std::string, std::optional<Date>> founded_of;
    for (const auto& comp : b.companies) founded_of[comp.id] = comp.founded;
    for (auto& [person, orgs] : person_orgs) {
      FounderRecord rec;
      rec.person_id = person;
      for (const auto& org : orgs) {
        auto f = founded_of.find(org);
        // Foundings need the company founding date; companies without one are
        // dropped by the filter anyway.
        if (f == founded_of.end() || !f->second) continue;
        rec.foundings.push_back(Founding{org, *f->second});
      }
      if (!rec.foundings.empty()) b.founders.push_back(std::move(rec));
    }
  }

  {
    auto t = read_csv_file(directory + "/news.csv");
    ColumnMap cols(t, {"org_uuid", "posted_on"}, "news.csv");
    auto& c = rep.files["news.csv"];
    c.rows_read = t.rows.size();
    for (const auto& row : t.rows) {
      std::string org(cols.get(row, 0));
      auto date = parse_date(cols.get(row, 1));
      if (org.empty() || !date) {
        ++c.malformed;
        continue;
      }
      if (!company_ids.count(org)) {
        ++c.integrity_drops;
        continue;
      }
      b.news.push_back(NewsItem{std::move(org), *date});
      ++c.rows_loaded;
    }
  }

  return std::move(b).freeze();
}

// Drops companies with no founding date or founded before 1990-01-01, along
// with their dependent rounds, exits, news, and foundings.
inline EntityStore filter_companies(const EntityStore& store, FilterReport* report = nullptr) {
  static const Date kCutoff{1990, 1, 1};
  FilterReport local;
  FilterReport& rep = report ? *report : local;

  std::unordered_set<std::string> keep;
  EntityStoreBuilder b;
  for (const auto& c : store.companies()) {
    if (!c.founded) {
      ++rep.removed_missing_founded;
      continue;
    }
    if (*c.founded < kCutoff) {
      ++rep.removed_pre_1990;
      continue;
    }
    keep.insert(c.id);
    b.companies.push_back(c);
  }
  for (const auto& r : store.rounds()) {
    if (keep.count(r.company_id))
      b.rounds.push_back(r);
    else
      ++rep.dependent_rounds_removed;
  }
  for (const auto& e : store.exits()) {
    if (keep.count(e.company_id))
      b.exits.push_back(e);
    else
      ++rep.dependent_exits_removed;
  }
  for (const auto& item : store.news()) {
    if (keep.count(item.company_id))
      b.news.push_back(item);
    else
      ++rep.dependent_news_removed;
  }
  for (const auto& f : store.founders()) {
    FounderRecord rec;
    rec.person_id = f.person_id;
    for (const auto& founding : f.foundings) {
      if (keep.count(founding.company_id))
        rec.foundings.push_back(founding);
      else
        ++rep.dependent_foundings_removed;
    }
    if (!rec.foundings.empty()) b.founders.push_back(std::move(rec));
  }
  return std::move(b).freeze();
}

struct IntervalRow {
  RoundType from;
  RoundType to;
  size_t count = 0;
  double mean_months = 0;
  double median_months = 0;
  double p90_months = 0;
  double within_18_fraction = 0;  // interval <= 18, inclusive
};

struct IntervalStats {
  std::vector<IntervalRow> rows;  // one per observed consecutive pair class
};

namespace detail {

inline double median_of_sorted(const std::vector<int>& v) {
  const size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double percentile_nearest_rank(const std::vector<int>& v, double q) {
  const size_t n = v.size();
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  return v[rank - 1];
}

}  // namespace detail

// Months between consecutive lettered rounds (Seed->A ... I->J) per company,
// using the earliest round of each letter. Month counts are month-index
// differences; negative intervals (out-of-order data) are discarded.
inline IntervalStats round_interval_stats(const EntityStore& store) {
  constexpr int kLadder = 11;  // Seed + A..J
  std::vector<std::vector<int>> intervals(kLadder - 1);

  for (size_t c = 0; c < store.companies().size(); ++c) {
    std::optional<Date> earliest[kLadder];
    for (size_t r : store.rounds_of(c)) {
      const auto& round = store.rounds()[r];
      int rank = lettered_rank(round.type);
      if (rank < 0) continue;
      if (!earliest[rank] || round.announced < *earliest[rank]) earliest[rank] = round.announced;
    }
    for (int k = 0; k + 1 < kLadder; ++k) {
      if (!earliest[k] || !earliest[k + 1]) continue;
      int m = months_between(*earliest[k + 1], *earliest[k]);
      if (m < 0) continue;
      intervals[k].push_back(m);
    }
  }

  IntervalStats stats;
  for (int k = 0; k + 1 < kLadder; ++k) {
    auto& v = intervals[k];
    if (v.empty()) continue;  // pair class with zero observations is omitted
    std::sort(v.begin(), v.end());
    IntervalRow row;
    row.from = k == 0 ? RoundType::Seed : static_cast<RoundType>(static_cast<int>(RoundType::A) + k - 1);
    row.to = static_cast<RoundType>(static_cast<int>(RoundType::A) + k);
    row.count = v.size();
    double sum = 0;
    size_t within = 0;
    for (int m : v) {
      sum += m;
      if (m <= 18) ++within;
    }
    row.mean_months = sum / static_cast<double>(v.size());
    row.median_months = detail::median_of_sorted(v);
    row.p90_months = detail::percentile_nearest_rank(v, 0.9);
    row.within_18_fraction = static_cast<double>(within) / static_cast<double>(v.size());
    stats.rows.push_back(row);
  }
  return stats;
}

inline std::string interval_stats_csv(const IntervalStats& stats) {
  std::string out =
      "funding_round,mean_interval_months,median_interval_months,p90_interval_months,"
      "within_18_months,count\n";
  for (const auto& r : stats.rows) {
    write_csv_row(out, {std::string(round_type_name(r.from)) + "->" +
                            std::string(round_type_name(r.to)),
                        format_double(r.mean_months), format_double(r.median_months),
                        format_double(r.p90_months), format_double(r.within_18_fraction),
                        std::to_string(r.count)});
  }
  return out;
}

}  // namespace nextround
