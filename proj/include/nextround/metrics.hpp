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
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/csv.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Confusion counts and the derived rates. Zero-denominator rates are
// reported as 0 with a flag instead of NaN so CSV exports stay numeric.
struct Metrics {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0, fpr = 0;
  double threshold = 0.5;
  bool precision_undefined = false;
  bool f1_undefined = false;

  nlohmann::json to_json() const {
    return {{"tp", tp},
            {"fp", fp},
            {"tn", tn},
            {"fn", fn},
            {"precision", precision},
            {"recall", recall},
            {"f1", f1},
            {"fpr", fpr},
            {"threshold", threshold},
            {"precision_undefined", precision_undefined},
            {"f1_undefined", f1_undefined}};
  }
};

// y_hat = 1 iff p >= th.
inline std::vector<int> classify(const std::vector<double>& probabilities, double th = 0.5) {
  std::vector<int> labels(probabilities.size());
  for (size_t i = 0; i < probabilities.size(); ++i) labels[i] = probabilities[i] >= th ? 1 : 0;
  return labels;
}

inline Metrics metrics_from_counts(size_t tp, size_t fp, size_t tn, size_t fn,
                                   double threshold = 0.5) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.threshold = threshold;
  if (tp + fp > 0)
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  else
    m.precision_undefined = true;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (m.precision + m.recall > 0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.f1_undefined = true;
  m.fpr = fp + tn > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
  return m;
}

inline Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual,
                               double threshold = 0.5) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("metrics: prediction/label length mismatch");
  if (predicted.empty()) throw std::invalid_argument("metrics: empty input");
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && actual[i])
      ++tp;
    else if (predicted[i] && !actual[i])
      ++fp;
    else if (!predicted[i] && actual[i])
      ++fn;
    else
      ++tn;
  }
  return metrics_from_counts(tp, fp, tn, fn, threshold);
}

inline Metrics score_metrics(const std::vector<double>& scores, const std::vector<int>& actual,
                             double threshold = 0.5) {
  return compute_metrics(classify(scores, threshold), actual, threshold);
}

struct RocPoint {
  double threshold = 0;
  double fpr = 0;
  double tpr = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold descending: (0,0) .. (1,1)
  double auc = 0;
};

// Exact ROC over the distinct score values, descending; tied scores form one
// point. AUC is the trapezoidal area.
inline RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc: length mismatch");
  size_t pos = 0;
  for (int y : labels) pos += y != 0;
  const size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc: both classes must be present");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });

  RocCurve curve;
  curve.points.push_back(RocPoint{std::numeric_limits<double>::infinity(), 0.0, 0.0});
  size_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]])
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.points.push_back(RocPoint{s, static_cast<double>(fp) / static_cast<double>(neg),
                                    static_cast<double>(tp) / static_cast<double>(pos)});
  }
  double auc = 0;
  for (size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

inline std::string roc_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    write_csv_row(out, {format_double(p.threshold), format_double(p.fpr), format_double(p.tpr)});
  return out;
}

// One comparison-table row: model x imbalance strategy x headline metrics.
struct ResultRow {
  std::string model;
  std::string strategy;
  Metrics metrics;
  double auc = 0;
};

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "model,strategy,precision,recall,f1,auc\n";
  for (const auto& r : rows)
    write_csv_row(out, {r.model, r.strategy, format_double(r.metrics.precision),
                        format_double(r.metrics.recall), format_double(r.metrics.f1),
                        format_double(r.auc)});
  return out;
}

}  // namespace nextround
