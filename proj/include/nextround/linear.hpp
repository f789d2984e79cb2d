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
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/gbdt.hpp"  // sigmoid
#include "nextround/scaler.hpp"

namespace nextround {

struct LogregParams {
  double l2 = 1e-4;
  int epochs = 500;
  double learning_rate = 0.5;
  bool class_weighting = false;
};

// Weighted logistic regression over scaled dense input, full-batch gradient
// descent. The scaler is part of the model so raw rows can be scored.
struct LogregModel {
  LogregParams params;
  std::vector<std::string> feature_names;
  ScalerSpec scaler;
  std::vector<double> coef;
  double intercept = 0;
  double final_grad_norm = 0;

  double predict_scaled(std::span<const double> x) const {
    double z = intercept;
    for (size_t j = 0; j < coef.size(); ++j) z += coef[j] * x[j];
    return sigmoid(z);
  }

  double predict(std::span<const double> x_raw) const {
    if (x_raw.size() != coef.size()) throw std::invalid_argument("feature arity mismatch");
    return predict_scaled(scaler.transform_copy(x_raw));
  }
};

namespace detail {

// Average weighted logistic loss plus L2 on the coefficients (not the
// intercept); gradient written into grad_coef/grad_intercept.
inline double logreg_loss_grad(const Dataset& d, const std::vector<double>& w,
                               const std::vector<double>& coef, double intercept, double l2,
                               std::vector<double>* grad_coef, double* grad_intercept) {
  const size_t n = d.n_rows();
  const size_t m = d.n_features();
  double w_total = 0;
  for (double wi : w) w_total += wi;
  double loss = 0;
  if (grad_coef) grad_coef->assign(m, 0.0);
  if (grad_intercept) *grad_intercept = 0;
  for (size_t i = 0; i < n; ++i) {
    auto row = d.row(i);
    double z = intercept;
    for (size_t j = 0; j < m; ++j) z += coef[j] * row[j];
    const double p = sigmoid(z);
    const double y = static_cast<double>(d.labels[i]);
    const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
    loss -= w[i] * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    if (grad_coef) {
      const double r = w[i] * (p - y);
      for (size_t j = 0; j < m; ++j) (*grad_coef)[j] += r * row[j];
      *grad_intercept += r;
    }
  }
  loss /= w_total;
  double reg = 0;
  for (size_t j = 0; j < m; ++j) reg += coef[j] * coef[j];
  loss += 0.5 * l2 * reg;
  if (grad_coef) {
    for (size_t j = 0; j < m; ++j) (*grad_coef)[j] = (*grad_coef)[j] / w_total + l2 * coef[j];
    *grad_intercept /= w_total;
  }
  return loss;
}

}  // namespace detail

// Expects pre-scaled dense input; use fit_scaler + transform upstream (the
// fitted scaler must be stored into the returned model by the caller) or the
// train_logreg_raw convenience wrapper below.
inline LogregModel train_logreg_scaled(const Dataset& scaled, LogregParams params) {
  scaled.check_consistent();
  const size_t n = scaled.n_rows();
  const size_t m = scaled.n_features();
  if (n == 0) throw std::invalid_argument("train_logreg: empty dataset");
  for (double v : scaled.values)
    if (is_missing(v)) throw std::invalid_argument("train_logreg: input must be dense");

  std::vector<double> w = scaled.weights;
  if (params.class_weighting) {
    const ClassWeights cw = class_weights(scaled.labels);
    for (size_t i = 0; i < n; ++i) w[i] *= scaled.labels[i] ? cw.w_pos : cw.w_neg;
  }

  LogregModel model;
  model.params = params;
  model.feature_names = scaled.feature_names;
  model.coef.assign(m, 0.0);
  std::vector<double> grad(m);
  double grad_b = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const double loss = detail::logreg_loss_grad(scaled, w, model.coef, model.intercept, params.l2,
                                                 &grad, &grad_b);
    if (!std::isfinite(loss)) throw std::runtime_error("train_logreg: non-finite loss");
    for (size_t j = 0; j < m; ++j) model.coef[j] -= params.learning_rate * grad[j];
    model.intercept -= params.learning_rate * grad_b;
  }
  double norm = grad_b * grad_b;
  for (double gj : grad) norm += gj * gj;
  model.final_grad_norm = std::sqrt(norm);
  return model;
}

inline LogregModel train_logreg(const Dataset& raw, LogregParams params) {
  ScalerSpec scaler = fit_scaler(raw);
  LogregModel model = train_logreg_scaled(transform(raw, scaler), params);
  model.scaler = scaler;
  return model;
}

inline nlohmann::json logreg_to_json(const LogregModel& m) {
  return {{"format_version", 1},
          {"family", "logreg"},
          {"feature_names", m.feature_names},
          {"params",
           {{"l2", m.params.l2},
            {"epochs", m.params.epochs},
            {"learning_rate", m.params.learning_rate},
            {"class_weighting", m.params.class_weighting}}},
          {"scaler", m.scaler.to_json()},
          {"coef", m.coef},
          {"intercept", m.intercept},
          {"final_grad_norm", m.final_grad_norm}};
}

inline LogregModel logreg_from_json(const nlohmann::json& j) {
  LogregModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& p = j.at("params");
  m.params.l2 = p.at("l2").get<double>();
  m.params.epochs = p.at("epochs").get<int>();
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.class_weighting = p.at("class_weighting").get<bool>();
  m.scaler = ScalerSpec::from_json(j.at("scaler"));
  m.coef = j.at("coef").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.final_grad_norm = j.at("final_grad_norm").get<double>();
  return m;
}

}  // namespace nextround
