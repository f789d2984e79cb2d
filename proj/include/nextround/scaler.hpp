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
#include <vector>

#include "nextround/resample.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Train-fitted standardization for the dense learners: median imputation
// followed by z-scoring. Test data always flows through train statistics.
struct ScalerSpec {
  std::vector<double> medians;
  std::vector<double> means;
  std::vector<double> stds;  // zeros replaced by 1

  size_t arity() const { return means.size(); }

  void transform_row(std::span<double> x) const {
    for (size_t j = 0; j < x.size(); ++j) {
      if (is_missing(x[j])) x[j] = medians[j];
      x[j] = (x[j] - means[j]) / stds[j];
    }
  }

  std::vector<double> transform_copy(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    transform_row(out);
    return out;
  }

  nlohmann::json to_json() const {
    return {{"medians", medians}, {"means", means}, {"stds", stds}};
  }

  static ScalerSpec from_json(const nlohmann::json& j) {
    ScalerSpec s;
    s.medians = j.at("medians").get<std::vector<double>>();
    s.means = j.at("means").get<std::vector<double>>();
    s.stds = j.at("stds").get<std::vector<double>>();
    return s;
  }
};

inline ScalerSpec fit_scaler(const Dataset& train) {
  ImputationVector iv = fit_median_imputer(train);
  ScalerSpec s;
  s.medians = iv.medians;
  const size_t m = train.n_features();
  const size_t n = train.n_rows();
  s.means.assign(m, 0.0);
  s.stds.assign(m, 1.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = train.row(i);
    for (size_t j = 0; j < m; ++j) s.means[j] += is_missing(row[j]) ? s.medians[j] : row[j];
  }
  for (size_t j = 0; j < m; ++j) s.means[j] /= static_cast<double>(n);
  std::vector<double> var(m, 0.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = train.row(i);
    for (size_t j = 0; j < m; ++j) {
      const double v = is_missing(row[j]) ? s.medians[j] : row[j];
      var[j] += (v - s.means[j]) * (v - s.means[j]);
    }
  }
  for (size_t j = 0; j < m; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.stds[j] = sd > 0 ? sd : 1.0;
  }
  return s;
}

inline Dataset transform(const Dataset& d, const ScalerSpec& s) {
  Dataset out = d;
  for (size_t i = 0; i < out.n_rows(); ++i) s.transform_row(out.row(i));
  return out;
}

}  // namespace nextround
