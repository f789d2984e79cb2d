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
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/scaler.hpp"

namespace nextround {

// K nearest neighbor over the z-scored training matrix. Probability is the
// positive fraction among the k nearest rows; distance ties break by row
// index. Weight adjustment is deliberately unsupported for this family.
struct KnnModel {
  int k = 5;
  std::vector<std::string> feature_names;
  ScalerSpec scaler;
  std::vector<double> train_values;  // scaled, row-major
  std::vector<int> train_labels;

  size_t n_rows() const { return train_labels.size(); }
  size_t n_features() const { return feature_names.size(); }

  double predict_scaled(std::span<const double> x) const {
    const size_t n = n_rows();
    const size_t m = n_features();
    std::vector<std::pair<double, size_t>> dist(n);
    for (size_t i = 0; i < n; ++i) {
      const double* row = train_values.data() + i * m;
      double d2 = 0;
      for (size_t j = 0; j < m; ++j) {
        const double diff = x[j] - row[j];
        d2 += diff * diff;
      }
      dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double positives = 0;
    for (int t = 0; t < k; ++t) positives += train_labels[dist[static_cast<size_t>(t)].second];
    return positives / static_cast<double>(k);
  }

  double predict(std::span<const double> x_raw) const {
    if (x_raw.size() != n_features()) throw std::invalid_argument("feature arity mismatch");
    return predict_scaled(scaler.transform_copy(x_raw));
  }
};

inline KnnModel train_knn(const Dataset& raw, int k, bool class_weighting = false) {
  if (class_weighting)
    throw std::invalid_argument("knn: weight adjustment is unsupported for this model family");
  if (k < 1 || static_cast<size_t>(k) > raw.n_rows())
    throw std::invalid_argument("knn: k must be in [1, n_rows]");
  KnnModel m;
  m.k = k;
  m.feature_names = raw.feature_names;
  m.scaler = fit_scaler(raw);
  Dataset scaled = transform(raw, m.scaler);
  m.train_values = std::move(scaled.values);
  m.train_labels = scaled.labels;
  return m;
}

inline nlohmann::json knn_to_json(const KnnModel& m) {
  return {{"format_version", 1},
          {"family", "knn"},
          {"feature_names", m.feature_names},
          {"params", {{"k", m.k}}},
          {"scaler", m.scaler.to_json()},
          {"train_values", m.train_values},
          {"train_labels", m.train_labels}};
}

inline KnnModel knn_from_json(const nlohmann::json& j) {
  KnnModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.k = j.at("params").at("k").get<int>();
  m.scaler = ScalerSpec::from_json(j.at("scaler"));
  m.train_values = j.at("train_values").get<std::vector<double>>();
  m.train_labels = j.at("train_labels").get<std::vector<int>>();
  return m;
}

}  // namespace nextround
