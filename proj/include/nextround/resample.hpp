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
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nextround/dataset.hpp"
#include "nextround/parallel.hpp"
#include "nextround/rng.hpp"

namespace nextround {

enum class ImbalanceStrategy { None, Smote, WeightAdjust };

struct ImbalancePlan {
  ImbalanceStrategy strategy = ImbalanceStrategy::None;
  size_t k_neighbors = 5;
  uint64_t seed = 0;
  int threads = 1;
};

struct ClassWeights {
  double w_pos = 1.0;
  double w_neg = 1.0;
};

// Inverse-frequency weights: w_c = n_total / (2 * n_c). Total weight mass
// stays n_total, split evenly between the classes.
inline ClassWeights class_weights(const std::vector<int>& labels) {
  size_t pos = 0;
  for (int y : labels) pos += y != 0;
  const size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("class_weights: both classes must be present");
  ClassWeights w;
  w.w_pos = static_cast<double>(labels.size()) / (2.0 * static_cast<double>(pos));
  w.w_neg = static_cast<double>(labels.size()) / (2.0 * static_cast<double>(neg));
  return w;
}

inline Dataset apply_class_weights(Dataset d) {
  ClassWeights w = class_weights(d.labels);
  for (size_t i = 0; i < d.n_rows(); ++i) d.weights[i] *= d.labels[i] ? w.w_pos : w.w_neg;
  return d;
}

// Column medians over present values. All-missing columns impute to 0 and are
// reported so callers can warn.
struct ImputationVector {
  std::vector<double> medians;
  std::vector<size_t> all_missing_columns;
};

inline ImputationVector fit_median_imputer(const Dataset& d) {
  if (d.n_rows() == 0) throw std::invalid_argument("impute_median: empty dataset");
  ImputationVector iv;
  iv.medians.resize(d.n_features(), 0.0);
  std::vector<double> col;
  for (size_t j = 0; j < d.n_features(); ++j) {
    col.clear();
    for (size_t i = 0; i < d.n_rows(); ++i) {
      double v = d.at(i, j);
      if (!is_missing(v)) col.push_back(v);
    }
    if (col.empty()) {
      iv.all_missing_columns.push_back(j);
      continue;
    }
    std::sort(col.begin(), col.end());
    const size_t n = col.size();
    iv.medians[j] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return iv;
}

inline Dataset apply_imputation(Dataset d, const ImputationVector& iv) {
  if (iv.medians.size() != d.n_features())
    throw std::invalid_argument("imputation vector arity mismatch");
  for (size_t i = 0; i < d.n_rows(); ++i) {
    auto row = d.row(i);
    for (size_t j = 0; j < row.size(); ++j)
      if (is_missing(row[j])) row[j] = iv.medians[j];
  }
  return d;
}

inline Dataset impute_median(const Dataset& d, ImputationVector* out_vector = nullptr) {
  ImputationVector iv = fit_median_imputer(d);
  if (out_vector) *out_vector = iv;
  return apply_imputation(d, iv);
}

// SMOTE: grow the minority class to exactly the majority count by sampling
// points on segments toward one of the k nearest minority neighbors.
// Neighbor distances are Euclidean in z-scored feature space so no single
// wide-scale column dominates; synthesized coordinates stay in the original
// space. Requires dense input (impute first).
inline Dataset smote(const Dataset& d, const ImbalancePlan& plan) {
  d.check_consistent();
  if (plan.k_neighbors < 1) throw std::invalid_argument("smote: k_neighbors must be >= 1");
  for (double v : d.values)
    if (is_missing(v)) throw std::invalid_argument("smote: dataset contains missing values; impute first");

  const size_t n = d.n_rows();
  const size_t m = d.n_features();
  size_t pos = d.positives();
  size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("smote: both classes must be present");
  const int minority_label = pos < neg ? 1 : 0;
  const size_t n_min = std::min(pos, neg);
  const size_t n_maj = std::max(pos, neg);
  if (n_min < plan.k_neighbors + 1)
    throw std::invalid_argument("smote: need at least k_neighbors+1 minority samples");

  std::vector<size_t> minority;
  minority.reserve(n_min);
  for (size_t i = 0; i < n; ++i)
    if ((d.labels[i] != 0) == (minority_label != 0)) minority.push_back(i);

  // dataset-wide z-scoring for the distance metric
  std::vector<double> mean(m, 0.0), inv_std(m, 1.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = d.row(i);
    for (size_t j = 0; j < m; ++j) mean[j] += row[j];
  }
  for (size_t j = 0; j < m; ++j) mean[j] /= static_cast<double>(n);
  std::vector<double> var(m, 0.0);
  for (size_t i = 0; i < n; ++i) {
    auto row = d.row(i);
    for (size_t j = 0; j < m; ++j) {
      double c = row[j] - mean[j];
      var[j] += c * c;
    }
  }
  for (size_t j = 0; j < m; ++j) {
    double sd = std::sqrt(var[j] / static_cast<double>(n));
    inv_std[j] = sd > 0 ? 1.0 / sd : 0.0;  // constant columns carry no distance
  }

  // scaled minority matrix, row-major
  std::vector<double> scaled(n_min * m);
  for (size_t a = 0; a < n_min; ++a) {
    auto row = d.row(minority[a]);
    for (size_t j = 0; j < m; ++j) scaled[a * m + j] = (row[j] - mean[j]) * inv_std[j];
  }

  const size_t k = plan.k_neighbors;
  std::vector<uint32_t> neighbors(n_min * k);
  parallel_for(n_min, plan.threads, [&](size_t begin, size_t end) {
    std::vector<std::pair<double, uint32_t>> cand;
    for (size_t a = begin; a < end; ++a) {
      cand.clear();
      cand.reserve(n_min - 1);
      const double* xa = scaled.data() + a * m;
      for (size_t b = 0; b < n_min; ++b) {
        if (b == a) continue;
        const double* xb = scaled.data() + b * m;
        double dist = 0;
        for (size_t j = 0; j < m; ++j) {
          double diff = xa[j] - xb[j];
          dist += diff * diff;
        }
        cand.emplace_back(dist, static_cast<uint32_t>(b));
      }
      // ties broken by row index via the pair ordering
      std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end());
      for (size_t t = 0; t < k; ++t) neighbors[a * k + t] = cand[t].second;
    }
  });

  Dataset out = d;
  const size_t n_new = n_maj - n_min;
  out.values.reserve(out.values.size() + n_new * m);
  Rng rng(plan.seed);
  std::vector<double> synth(m);
  for (size_t s = 0; s < n_new; ++s) {
    const size_t a = s % n_min;  // cycle through minority bases
    const size_t b = neighbors[a * k + rng.below(k)];
    const double u = rng.uniform();
    auto xa = d.row(minority[a]);
    auto xb = d.row(minority[b]);
    for (size_t j = 0; j < m; ++j) synth[j] = xa[j] + u * (xb[j] - xa[j]);
    out.add_row(synth, minority_label, 1.0);
  }
  return out;
}

}  // namespace nextround
