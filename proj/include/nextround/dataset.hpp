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
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextround {

// Missing cells are quiet NaNs. Absent source data stays missing, never 0;
// that sparsity is exactly what the sparsity-aware models consume.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Row-major labeled matrix with per-sample weights. Default weight is 1.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // n_rows * n_features, NaN = missing
  std::vector<int> labels;
  std::vector<double> weights;

  size_t n_features() const { return feature_names.size(); }
  size_t n_rows() const { return labels.size(); }

  std::span<const double> row(size_t i) const {
    return {values.data() + i * n_features(), n_features()};
  }
  std::span<double> row(size_t i) {
    return {values.data() + i * n_features(), n_features()};
  }
  double at(size_t i, size_t j) const { return values[i * n_features() + j]; }

  void add_row(std::span<const double> x, int label, double weight = 1.0) {
    if (x.size() != n_features()) throw std::invalid_argument("row arity mismatch");
    if (!(weight > 0)) throw std::invalid_argument("weights must be positive");
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(label);
    weights.push_back(weight);
  }

  size_t positives() const {
    size_t p = 0;
    for (int y : labels) p += y != 0;
    return p;
  }

  void check_consistent() const {
    if (values.size() != n_rows() * n_features() || weights.size() != n_rows())
      throw std::logic_error("dataset shape mismatch");
  }
};

}  // namespace nextround
