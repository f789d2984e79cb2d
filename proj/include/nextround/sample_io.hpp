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

#include <charconv>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/features.hpp"
#include "nextround/windows.hpp"

namespace nextround {

// Sample/feature CSV: company_id,window_index,t_s,t_f,label plus the 19
// factor columns. An empty cell is a missing value; `windows` writes the
// columns empty and `features` fills them.
inline std::string samples_csv(const std::vector<SampleEvent>& samples,
                               const Dataset* features = nullptr) {
  std::string out = "company_id,window_index,t_s,t_f,label";
  for (const auto& name : factor_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  std::vector<std::string> fields;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    fields.clear();
    fields.push_back(s.company_id);
    fields.push_back(std::to_string(s.window.index));
    fields.push_back(to_string(s.window.t_s));
    fields.push_back(to_string(s.window.t_f));
    fields.push_back(std::to_string(s.label));
    for (size_t j = 0; j < kNumFactors; ++j) {
      if (!features) {
        fields.emplace_back();
        continue;
      }
      const double v = features->at(i, j);
      fields.push_back(is_missing(v) ? std::string() : format_double(v));
    }
    write_csv_row(out, fields);
  }
  return out;
}

struct LoadedSamples {
  std::vector<SampleEvent> samples;
  Dataset features;  // rows align with samples
};

inline LoadedSamples load_samples_csv(const std::string& path) {
  CsvTable t = read_csv_file(path);
  LoadedSamples out;
  out.features.feature_names.assign(factor_names().begin(), factor_names().end());
  const int ci = t.column("company_id");
  const int wi = t.column("window_index");
  const int tsi = t.column("t_s");
  const int tfi = t.column("t_f");
  const int li = t.column("label");
  if (ci < 0 || wi < 0 || tsi < 0 || tfi < 0 || li < 0)
    throw std::runtime_error(path + ": missing required sample columns");
  std::vector<int> fcol(kNumFactors);
  for (size_t j = 0; j < kNumFactors; ++j) {
    fcol[j] = t.column(factor_names()[j]);
    if (fcol[j] < 0) throw std::runtime_error(path + ": missing factor column " + factor_names()[j]);
  }
  auto parse_int = [&](const std::string& cell) {
    int v = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw std::runtime_error(path + ": bad integer cell '" + cell + "'");
    return v;
  };
  std::vector<double> row(kNumFactors);
  for (const auto& r : t.rows) {
    SampleEvent s;
    s.company_id = r[static_cast<size_t>(ci)];
    s.window.index = parse_int(r[static_cast<size_t>(wi)]);
    auto ts = parse_date(r[static_cast<size_t>(tsi)]);
    auto tf = parse_date(r[static_cast<size_t>(tfi)]);
    if (!ts || !tf) throw std::runtime_error(path + ": bad window dates");
    s.window.t_s = *ts;
    s.window.t_f = *tf;
    s.label = parse_int(r[static_cast<size_t>(li)]);
    for (size_t j = 0; j < kNumFactors; ++j) {
      const std::string& cell = r[static_cast<size_t>(fcol[j])];
      if (cell.empty()) {
        row[j] = kMissing;
      } else {
        double v = 0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc()) throw std::runtime_error(path + ": bad numeric cell " + cell);
        row[j] = v;
      }
    }
    out.features.add_row(row, s.label);
    out.samples.push_back(std::move(s));
  }
  return out;
}

inline std::string label_distribution_csv(const std::vector<LabelDistributionRow>& rows) {
  std::string out = "t_s,t_f,success,fail,success_pct\n";
  size_t total_s = 0, total_f = 0;
  for (const auto& r : rows) {
    total_s += r.success;
    total_f += r.fail;
    const size_t n = r.success + r.fail;
    write_csv_row(out, {to_string(r.window.t_s), to_string(r.window.t_f),
                        std::to_string(r.success), std::to_string(r.fail),
                        n ? format_double(100.0 * static_cast<double>(r.success) /
                                          static_cast<double>(n))
                          : "0"});
  }
  const size_t total = total_s + total_f;
  write_csv_row(out, {"total", "", std::to_string(total_s), std::to_string(total_f),
                      total ? format_double(100.0 * static_cast<double>(total_s) /
                                            static_cast<double>(total))
                            : "0"});
  return out;
}

}  // namespace nextround
