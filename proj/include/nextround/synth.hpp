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
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/features.hpp"
#include "nextround/gbdt.hpp"  // sigmoid, log_odds
#include "nextround/rng.hpp"
#include "nextround/windows.hpp"

namespace nextround {

// Per-family rates of injected missingness.
//
// Missing-at-random mode (informative = false): masking is applied after the
// window simulation, so the planted success probabilities use the pre-mask
// factor values and the holes are pure observation noise.
//
// Informative mode (informative = true): masking happens before the
// simulation, so the planted probability is a function of the OBSERVED
// factors (a missing slot contributes the neutral 0 instead of its value's
// transform). A missing cell then genuinely shifts the success propensity
// relative to a present value. Family draws are independent, so the signal
// lives in the missing cells themselves; learned default directions can
// route it while median imputation merges it into the imputed value's mass.
struct MissingnessConfig {
  double area = 0.0;
  double industries = 0.0;
  double amounts = 0.0;
  double investors = 0.0;
  double founders = 0.0;
  bool informative = false;
};

// Fixed squashing transform per factor: tanh((x - center) / scale), with
// missing treated as the neutral 0. The planted success probability is
// sigmoid(intercept + sum_j coef_j * transform_j(factor_j)).
struct FactorEffect {
  double coef = 0;
  double center = 0;
  double scale = 1;
};

inline std::array<FactorEffect, kNumFactors> default_factor_effects() {
  std::array<FactorEffect, kNumFactors> e{};
  e[kFoundYearOffset] = {0.0, 15, 10};
  e[kMacroeconomy] = {0.15, 0, 1};  // scale patched at generation from n_companies
  e[kCompanyAgeMonths] = {-0.7, 48, 48};
  e[kNewsCount] = {0.5, 6, 12};
  e[kMonthlyAvgNews] = {0.3, 0.1, 0.2};
  e[kProvinceProsperity] = {0.3, 0, 1};  // patched
  e[kCityProsperity] = {0.2, 0, 1};      // patched
  e[kMeanIndustryProsperityProvince] = {0.2, 0, 1};  // patched
  e[kMaxIndustryProsperityProvince] = {0.1, 0, 1};   // patched
  e[kMeanIndustryProsperityCity] = {0.2, 0, 1};      // patched
  e[kMaxIndustryProsperityCity] = {0.1, 0, 1};       // patched
  e[kNumFundingRounds] = {0.9, 2, 2};
  e[kTotalRaisedUsd] = {0.6, 6e6, 1.2e7};
  e[kMeanInvestorIpoFraction] = {0.6, 0.05, 0.1};
  e[kMaxInvestorIpoFraction] = {0.3, 0.1, 0.15};
  e[kMeanInvestorAcqFraction] = {0.4, 0.08, 0.12};
  e[kMaxInvestorAcqFraction] = {0.2, 0.12, 0.18};
  e[kMeanFounderFailFraction] = {-0.4, 0.3, 0.3};
  e[kMaxFounderFailFraction] = {-0.2, 0.4, 0.3};
  return e;
}

struct SynthConfig {
  size_t n_companies = 2000;
  size_t n_investors = 200;
  size_t n_founders = 1500;
  int first_founding_year = 1992;
  int last_founding_year = 2016;
  size_t n_provinces = 10;
  size_t cities_per_province = 3;
  size_t n_industries = 18;
  std::array<FactorEffect, kNumFactors> effects = default_factor_effects();
  // Per-window target mean success propensity; the intercept is calibrated by
  // bisection each window unless fixed_intercept is set.
  double target_success_rate = 0.24;
  std::vector<double> window_rates;  // optional per-window override
  std::optional<double> fixed_intercept;
  MissingnessConfig missing;
  uint64_t seed = 0;
};

struct GroundTruthRow {
  std::string company_id;
  int window_index = 0;
  double latent_probability = 0;
};

struct SynthResult {
  EntityStore store;          // post-masking view, ready for emit/ingest
  std::vector<GroundTruthRow> truth;
};

namespace detail {

struct SynthCompany {
  double quality = 0;    // latent; drives news rate, amounts, missingness
  size_t last_rank = 0;  // position on the Seed..J ladder
};

inline std::string padded_id(char prefix, size_t i, int width) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, i);
  return buf;
}

inline Date random_date_between(Rng& rng, const Date& lo, const Date& hi) {
  const int64_t a = days_from_civil(lo);
  const int64_t b = days_from_civil(hi);
  return civil_from_days(a + static_cast<int64_t>(rng.below(static_cast<uint64_t>(b - a + 1))));
}

}  // namespace detail

// Deterministic synthetic venture ecosystem. Companies, founders, investors,
// news, and an initial funding round are generated up front; the 13 standard
// windows are then simulated in order. At each window start the real factor
// pipeline runs on the partial store, the planted logistic maps factors to a
// success probability, and events (new rounds, exits, closures) are drawn
// from it. Temporal hygiene of the factor definitions guarantees that
// post-hoc factor computation on the final store reproduces exactly what the
// simulation saw.
inline SynthResult generate(const SynthConfig& config) {
  if (config.n_companies == 0) throw std::invalid_argument("synth: n_companies must be > 0");
  if (config.first_founding_year < 1990 || config.last_founding_year > 2020 ||
      config.first_founding_year > config.last_founding_year)
    throw std::invalid_argument("synth: founding years must lie within [1990, 2020]");
  for (double r : {config.missing.area, config.missing.industries, config.missing.amounts,
                   config.missing.investors, config.missing.founders})
    if (r < 0 || r > 1) throw std::invalid_argument("synth: missingness rates must be in [0,1]");

  Rng rng(config.seed);
  auto effects = config.effects;
  // patch prosperity scales to the ecosystem size
  const double density =
      static_cast<double>(config.n_companies) / static_cast<double>(config.n_provinces);
  effects[kMacroeconomy].center = static_cast<double>(config.n_companies) /
                                  (config.last_founding_year - config.first_founding_year + 1);
  effects[kMacroeconomy].scale = std::max(1.0, effects[kMacroeconomy].center);
  effects[kProvinceProsperity] = {effects[kProvinceProsperity].coef, 0.4 * density,
                                  0.5 * density};
  effects[kCityProsperity] = {effects[kCityProsperity].coef, 0.4 * density / 3.0,
                              0.5 * density / 3.0};
  const double ind_density = density / static_cast<double>(config.n_industries) * 2.0;
  effects[kMeanIndustryProsperityProvince] = {effects[kMeanIndustryProsperityProvince].coef,
                                              0.4 * ind_density, 0.5 * ind_density};
  effects[kMaxIndustryProsperityProvince] = {effects[kMaxIndustryProsperityProvince].coef,
                                             0.5 * ind_density, 0.6 * ind_density};
  effects[kMeanIndustryProsperityCity] = {effects[kMeanIndustryProsperityCity].coef,
                                          0.15 * ind_density, 0.25 * ind_density};
  effects[kMaxIndustryProsperityCity] = {effects[kMaxIndustryProsperityCity].coef,
                                         0.2 * ind_density, 0.3 * ind_density};

  const size_t n = config.n_companies;
  std::vector<Company> companies(n);
  std::vector<detail::SynthCompany> latent(n);
  std::vector<FundingRound> rounds;
  std::vector<ExitEvent> exits;
  std::vector<NewsItem> news;

  // founding dates ascending (duplicates allowed)
  std::vector<Date> founding_dates(n);
  const Date lo{config.first_founding_year, 1, 1};
  const Date hi{config.last_founding_year, 12, 31};
  for (auto& d : founding_dates) d = detail::random_date_between(rng, lo, hi);
  std::sort(founding_dates.begin(), founding_dates.end());

  const int id_width = 7;
  for (size_t i = 0; i < n; ++i) {
    Company& c = companies[i];
    c.id = detail::padded_id('c', i, id_width);
    c.name = "Synth Co " + std::to_string(i);
    c.founded = founding_dates[i];
    const size_t province = rng.below(config.n_provinces);
    const size_t city = rng.below(config.cities_per_province);
    c.province = "Province" + std::to_string(province);
    c.city = *c.province + "-City" + std::to_string(city);
    const size_t n_tags = 1 + rng.below(3);
    for (size_t t = 0; t < n_tags; ++t)
      c.industries.push_back("industry" + std::to_string(rng.below(config.n_industries)));
    std::sort(c.industries.begin(), c.industries.end());
    c.industries.erase(std::unique(c.industries.begin(), c.industries.end()),
                       c.industries.end());
    latent[i].quality = rng.normal(0, 1);
  }

  // founders: the genesis cohort gets fresh founders and closes before the
  // first window; everyone after gets one experienced founder so the founder
  // factors are structurally defined
  const size_t genesis = std::min(n, std::max<size_t>(2, n / 50));
  std::vector<std::vector<size_t>> founders_of_company(n);
  // Experienced pool: founders of companies founded STRICTLY earlier, so the
  // strict "founded before" comparison in the founder factors always sees a
  // prior founding. A lagging pointer admits companies into the pool only
  // once the founding date strictly advances past theirs.
  std::vector<size_t> experienced;
  size_t admitted = 0;
  size_t next_founder = 0;
  auto fresh_founder = [&]() -> size_t {
    if (next_founder < config.n_founders) return next_founder++;
    return rng.below(config.n_founders);
  };
  for (size_t i = 0; i < n; ++i) {
    while (admitted < i && founding_dates[admitted] < founding_dates[i]) {
      for (size_t f : founders_of_company[admitted]) experienced.push_back(f);
      ++admitted;
    }
    if (i < genesis || experienced.empty()) {
      founders_of_company[i].push_back(fresh_founder());
    } else {
      founders_of_company[i].push_back(experienced[rng.below(experienced.size())]);
      if (rng.bernoulli(0.5)) founders_of_company[i].push_back(fresh_founder());
    }
    std::sort(founders_of_company[i].begin(), founders_of_company[i].end());
    founders_of_company[i].erase(
        std::unique(founders_of_company[i].begin(), founders_of_company[i].end()),
        founders_of_company[i].end());
  }

  // The genesis cohort exists only to seed founder histories: it never gets
  // a funding round (so it is never sample-eligible) and mostly closes young,
  // which is what gives founder fail fractions their spread.
  for (size_t i = 0; i < genesis; ++i) {
    if (!rng.bernoulli(0.7)) continue;
    const Date founded = *companies[i].founded;
    companies[i].closed = civil_from_days(days_from_civil(founded) + 90 +
                                          static_cast<int64_t>(rng.below(720)));
  }

  // investors with a latent quality used only to shape assignment variety
  std::vector<std::string> investor_ids(config.n_investors);
  for (size_t v = 0; v < config.n_investors; ++v)
    investor_ids[v] = detail::padded_id('v', v, 5);

  // In informative mode masking applies as entities are created, so the
  // window simulation (and with it the planted truth) only ever sees the
  // observable view.
  const bool pre_mask = config.missing.informative;
  auto miss_rate = [&](double rate, size_t) { return rate; };

  size_t round_seq = 0;
  auto add_round = [&](size_t company, RoundType type, const Date& date, double amount,
                       size_t n_investors) {
    FundingRound r;
    r.id = detail::padded_id('r', round_seq++, 8);
    r.company_id = companies[company].id;
    r.type = type;
    r.announced = date;
    r.raised_usd = std::round(amount);
    for (size_t k = 0; k < n_investors; ++k)
      r.investor_ids.push_back(investor_ids[rng.below(config.n_investors)]);
    std::sort(r.investor_ids.begin(), r.investor_ids.end());
    r.investor_ids.erase(std::unique(r.investor_ids.begin(), r.investor_ids.end()),
                         r.investor_ids.end());
    if (pre_mask) {
      if (rng.bernoulli(miss_rate(config.missing.amounts, company))) r.raised_usd.reset();
      if (rng.bernoulli(miss_rate(config.missing.investors, company))) r.investor_ids.clear();
    }
    rounds.push_back(std::move(r));
  };

  if (pre_mask) {
    for (size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(miss_rate(config.missing.area, i))) {
        companies[i].province.reset();
        companies[i].city.reset();
      } else if (rng.bernoulli(miss_rate(config.missing.area, i) * 0.5)) {
        companies[i].city.reset();
      }
      if (rng.bernoulli(miss_rate(config.missing.industries, i))) companies[i].industries.clear();
      if (rng.bernoulli(miss_rate(config.missing.founders, i))) founders_of_company[i].clear();
    }
  }

  // initial seed round within a year of founding (genesis cohort excepted)
  for (size_t i = genesis; i < n; ++i) {
    const Date founded = *companies[i].founded;
    const Date date = civil_from_days(days_from_civil(founded) + 30 +
                                      static_cast<int64_t>(rng.below(330)));
    const RoundType type = rng.bernoulli(0.8) ? RoundType::Seed : RoundType::PreSeed;
    const double amount =
        std::exp(rng.normal(std::log(8e5), 0.6) + 0.3 * latent[i].quality);
    add_round(i, type, date, amount, 1 + rng.below(2));
  }

  // news streams, founding through 2019; spec'd to be counted regardless of
  // later closure, so they can be generated up front
  for (size_t i = 0; i < n; ++i) {
    const double monthly_rate = 0.06 * std::exp(0.7 * latent[i].quality);
    const Date founded = *companies[i].founded;
    const int first_month = founded.month_index();
    const int last_month = Date{2019, 12, 1}.month_index();
    for (int mi = first_month; mi <= last_month; ++mi) {
      const int count = rng.poisson(monthly_rate);
      for (int k = 0; k < count; ++k) {
        const int y = mi / 12;
        const int mo = mi % 12 + 1;
        news.push_back(NewsItem{companies[i].id,
                                Date{y, mo, 1 + static_cast<int>(rng.below(
                                                    static_cast<uint64_t>(days_in_month(y, mo))))}});
      }
    }
  }

  auto freeze_snapshot = [&]() {
    EntityStoreBuilder b;
    b.companies = companies;
    b.rounds = rounds;
    b.exits = exits;
    b.news = news;
    for (size_t f = 0; f < config.n_founders; ++f) b.founders.push_back(FounderRecord{
        detail::padded_id('p', f, 5), {}});
    // foundings from the assignment table
    std::unordered_map<std::string, size_t> founder_index;
    for (size_t f = 0; f < b.founders.size(); ++f) founder_index[b.founders[f].person_id] = f;
    for (size_t i = 0; i < n; ++i) {
      for (size_t f : founders_of_company[i]) {
        b.founders[f].foundings.push_back(Founding{companies[i].id, *companies[i].founded});
      }
    }
    std::erase_if(b.founders, [](const FounderRecord& r) { return r.foundings.empty(); });
    return std::move(b).freeze();
  };

  // windowed simulation
  const auto windows = window_schedule();
  std::vector<GroundTruthRow> truth;
  for (const auto& w : windows) {
    EntityStore snapshot = freeze_snapshot();
    std::vector<size_t> eligible_companies;  // indices into our arrays
    std::vector<double> score;
    for (size_t i = 0; i < n; ++i) {
      auto idx = snapshot.company_index(companies[i].id);
      if (!idx || !eligible(snapshot, *idx, w.t_s)) continue;
      auto x = compute_factors(snapshot, *idx, w.t_s);
      double s = 0;
      for (size_t j = 0; j < kNumFactors; ++j) {
        if (effects[j].coef == 0) continue;
        const double t =
            is_missing(x[j]) ? 0.0 : std::tanh((x[j] - effects[j].center) / effects[j].scale);
        s += effects[j].coef * t;
      }
      eligible_companies.push_back(i);
      score.push_back(s);
    }
    if (eligible_companies.empty()) continue;

    double target = config.target_success_rate;
    if (static_cast<size_t>(w.index) < config.window_rates.size())
      target = config.window_rates[static_cast<size_t>(w.index)];
    double intercept;
    if (config.fixed_intercept) {
      intercept = *config.fixed_intercept;
    } else {
      double lo_b = -20, hi_b = 20;
      for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo_b + hi_b);
        double mean = 0;
        for (double s : score) mean += sigmoid(mid + s);
        mean /= static_cast<double>(score.size());
        (mean < target ? lo_b : hi_b) = mid;
      }
      intercept = 0.5 * (lo_b + hi_b);
    }

    static const std::array<RoundType, 10> ladder = {
        RoundType::A, RoundType::B, RoundType::C, RoundType::D, RoundType::E,
        RoundType::F, RoundType::G, RoundType::H, RoundType::I, RoundType::J};
    for (size_t k = 0; k < eligible_companies.size(); ++k) {
      const size_t i = eligible_companies[k];
      const double p = sigmoid(intercept + score[k]);
      truth.push_back(GroundTruthRow{companies[i].id, w.index, p});
      const Date event_date = detail::random_date_between(rng, w.t_s, w.t_f);
      if (rng.uniform() < p) {
        const double kind = rng.uniform();
        if (kind < 0.90) {
          // next funding round, mostly up the ladder
          RoundType type;
          if (rng.bernoulli(0.85)) {
            const size_t rank = std::min<size_t>(latent[i].last_rank, ladder.size() - 1);
            type = ladder[rank];
            latent[i].last_rank = rank + 1;
          } else {
            static const std::array<RoundType, 4> side = {RoundType::OtherEquity, RoundType::Debt,
                                                          RoundType::Corporate,
                                                          RoundType::Convertible};
            type = side[rng.below(side.size())];
          }
          const double amount = std::exp(rng.normal(std::log(3e6), 0.8) +
                                         0.8 * static_cast<double>(latent[i].last_rank) +
                                         0.3 * latent[i].quality);
          add_round(i, type, event_date, amount, 1 + rng.below(3));
        } else if (kind < 0.97) {
          exits.push_back(ExitEvent{companies[i].id, ExitKind::Acquisition, event_date});
        } else {
          exits.push_back(ExitEvent{companies[i].id, ExitKind::IPO, event_date});
        }
      } else {
        const double close_p = 0.10 * (1.5 - sigmoid(latent[i].quality));
        if (rng.bernoulli(close_p)) companies[i].closed = event_date;
      }
    }
  }

  // missing-at-random masking happens after the simulation, against the
  // pre-mask planted truth
  if (!pre_mask) {
    std::unordered_map<std::string, size_t> company_pos;
    for (size_t i = 0; i < n; ++i) company_pos[companies[i].id] = i;
    for (size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(miss_rate(config.missing.area, i))) {
        companies[i].province.reset();
        companies[i].city.reset();
      } else if (rng.bernoulli(miss_rate(config.missing.area, i) * 0.5)) {
        companies[i].city.reset();
      }
      if (rng.bernoulli(miss_rate(config.missing.industries, i))) companies[i].industries.clear();
      if (rng.bernoulli(miss_rate(config.missing.founders, i))) founders_of_company[i].clear();
    }
    for (auto& r : rounds) {
      const size_t i = company_pos[r.company_id];
      if (rng.bernoulli(miss_rate(config.missing.amounts, i))) r.raised_usd.reset();
      if (rng.bernoulli(miss_rate(config.missing.investors, i))) r.investor_ids.clear();
    }
  }

  SynthResult result;
  result.store = freeze_snapshot();
  result.truth = std::move(truth);
  return result;
}

// Writes the exact CSV schema `ingest` consumes, in canonical order. Loading
// the directory and emitting again reproduces the files byte for byte.
inline void emit_export(const EntityStore& store, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("emit_export: cannot create " + directory);

  std::string orgs = "uuid,name,founded_on,closed_on,status,country,region,city,category_list\n";
  for (const auto& c : store.companies()) {
    std::string tags;
    for (size_t t = 0; t < c.industries.size(); ++t) {
      if (t) tags += '|';
      tags += c.industries[t];
    }
    write_csv_row(orgs, {c.id, c.name, c.founded ? to_string(*c.founded) : "",
                         c.closed ? to_string(*c.closed) : "",
                         c.closed ? "closed" : "operating", "SYN",
                         c.province.value_or(""), c.city.value_or(""), tags});
  }
  write_text_file(directory + "/organizations.csv", orgs);

  std::string fr = "uuid,org_uuid,investment_type,announced_on,raised_amount_usd\n";
  std::string inv = "funding_round_uuid,investor_uuid\n";
  for (const auto& r : store.rounds()) {
    write_csv_row(fr, {r.id, r.company_id, std::string(round_type_name(r.type)),
                       to_string(r.announced),
                       r.raised_usd ? format_double(*r.raised_usd) : ""});
    for (const auto& v : r.investor_ids) write_csv_row(inv, {r.id, v});
  }
  write_text_file(directory + "/funding_rounds.csv", fr);
  write_text_file(directory + "/investments.csv", inv);

  std::string acq = "acquiree_uuid,acquired_on\n";
  std::string ipo = "org_uuid,went_public_on\n";
  for (const auto& e : store.exits()) {
    if (e.kind == ExitKind::Acquisition)
      write_csv_row(acq, {e.company_id, to_string(e.date)});
    else
      write_csv_row(ipo, {e.company_id, to_string(e.date)});
  }
  write_text_file(directory + "/acquisitions.csv", acq);
  write_text_file(directory + "/ipos.csv", ipo);

  std::string founders = "person_uuid,org_uuid\n";
  for (const auto& f : store.founders())
    for (const auto& founding : f.foundings) write_csv_row(founders, {f.person_id, founding.company_id});
  write_text_file(directory + "/founders.csv", founders);

  std::string news = "org_uuid,posted_on\n";
  for (const auto& item : store.news()) write_csv_row(news, {item.company_id, to_string(item.date)});
  write_text_file(directory + "/news.csv", news);
}

inline std::string ground_truth_csv(const std::vector<GroundTruthRow>& truth) {
  std::string out = "company_id,window_index,latent_probability\n";
  for (const auto& row : truth)
    write_csv_row(out, {row.company_id, std::to_string(row.window_index),
                        format_double(row.latent_probability)});
  return out;
}

inline std::vector<GroundTruthRow> load_ground_truth(const std::string& path) {
  CsvTable t = read_csv_file(path);
  const int ci = t.column("company_id");
  const int wi = t.column("window_index");
  const int pi = t.column("latent_probability");
  if (ci < 0 || wi < 0 || pi < 0) throw std::runtime_error("ground truth: bad header");
  std::vector<GroundTruthRow> truth;
  for (const auto& row : t.rows) {
    GroundTruthRow g;
    g.company_id = row[static_cast<size_t>(ci)];
    g.window_index = std::stoi(row[static_cast<size_t>(wi)]);
    g.latent_probability = std::stod(row[static_cast<size_t>(pi)]);
    truth.push_back(std::move(g));
  }
  return truth;
}

}  // namespace nextround
