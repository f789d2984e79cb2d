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
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/gbdt.hpp"  // sigmoid
#include "nextround/rng.hpp"
#include "nextround/scaler.hpp"

namespace nextround {

struct MlpParams {
  int hidden = 64;      // two hidden layers of this width
  double dropout = 0.1;
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 30;
  bool class_weighting = false;
  uint64_t seed = 0;
};

// input -> hidden -> hidden -> 1 with rectified-linear hidden units and a
// logistic output. Parameters live in one flat vector: [W1 b1 W2 b2 W3 b3].
struct MlpModel {
  MlpParams params;
  std::vector<std::string> feature_names;
  ScalerSpec scaler;
  int input_dim = 0;
  std::vector<double> theta;
  std::vector<double> train_loss;  // per epoch

  size_t w1() const { return 0; }
  size_t b1() const { return static_cast<size_t>(params.hidden * input_dim); }
  size_t w2() const { return b1() + static_cast<size_t>(params.hidden); }
  size_t b2() const { return w2() + static_cast<size_t>(params.hidden * params.hidden); }
  size_t w3() const { return b2() + static_cast<size_t>(params.hidden); }
  size_t b3() const { return w3() + static_cast<size_t>(params.hidden); }
  size_t n_params() const { return b3() + 1; }

  // Deterministic inference; dropout is a training-only behavior.
  double predict_scaled(std::span<const double> x) const {
    const int h = params.hidden;
    std::vector<double> a1(static_cast<size_t>(h)), a2(static_cast<size_t>(h));
    for (int u = 0; u < h; ++u) {
      double z = theta[b1() + static_cast<size_t>(u)];
      const double* row = theta.data() + w1() + static_cast<size_t>(u * input_dim);
      for (int j = 0; j < input_dim; ++j) z += row[j] * x[static_cast<size_t>(j)];
      a1[static_cast<size_t>(u)] = z > 0 ? z : 0;
    }
    for (int u = 0; u < h; ++u) {
      double z = theta[b2() + static_cast<size_t>(u)];
      const double* row = theta.data() + w2() + static_cast<size_t>(u * h);
      for (int j = 0; j < h; ++j) z += row[j] * a1[static_cast<size_t>(j)];
      a2[static_cast<size_t>(u)] = z > 0 ? z : 0;
    }
    double z = theta[b3()];
    for (int j = 0; j < h; ++j) z += theta[w3() + static_cast<size_t>(j)] * a2[static_cast<size_t>(j)];
    return sigmoid(z);
  }

  double predict(std::span<const double> x_raw) const {
    if (static_cast<int>(x_raw.size()) != input_dim)
      throw std::invalid_argument("feature arity mismatch");
    return predict_scaled(scaler.transform_copy(x_raw));
  }
};

namespace detail {

// Weighted cross-entropy over the given rows; accumulates dLoss/dtheta when
// grad != nullptr. Dropout masks (inverted scaling) apply to hidden
// activations; pass empty masks for exact deterministic loss.
inline double mlp_loss_grad(const MlpModel& m, const Dataset& d, const std::vector<double>& w,
                            const std::vector<size_t>& rows, const std::vector<uint8_t>& mask1,
                            const std::vector<uint8_t>& mask2, double keep,
                            std::vector<double>* grad) {
  const int h = m.params.hidden;
  const int in = m.input_dim;
  const auto& theta = m.theta;
  if (grad) grad->assign(m.n_params(), 0.0);

  double w_total = 0;
  for (size_t r : rows) w_total += w[r];
  double loss = 0;

  std::vector<double> a1(static_cast<size_t>(h)), a2(static_cast<size_t>(h));
  std::vector<double> d1(static_cast<size_t>(h)), d2(static_cast<size_t>(h));
  const bool use_mask = !mask1.empty();
  for (size_t idx = 0; idx < rows.size(); ++idx) {
    const size_t r = rows[idx];
    auto x = d.row(r);
    // forward
    for (int u = 0; u < h; ++u) {
      double z = theta[m.b1() + static_cast<size_t>(u)];
      const double* wrow = theta.data() + m.w1() + static_cast<size_t>(u * in);
      for (int j = 0; j < in; ++j) z += wrow[j] * x[static_cast<size_t>(j)];
      double a = z > 0 ? z : 0;
      if (use_mask) a = mask1[idx * static_cast<size_t>(h) + static_cast<size_t>(u)] ? a / keep : 0;
      a1[static_cast<size_t>(u)] = a;
    }
    for (int u = 0; u < h; ++u) {
      double z = theta[m.b2() + static_cast<size_t>(u)];
      const double* wrow = theta.data() + m.w2() + static_cast<size_t>(u * h);
      for (int j = 0; j < h; ++j) z += wrow[j] * a1[static_cast<size_t>(j)];
      double a = z > 0 ? z : 0;
      if (use_mask) a = mask2[idx * static_cast<size_t>(h) + static_cast<size_t>(u)] ? a / keep : 0;
      a2[static_cast<size_t>(u)] = a;
    }
    double z3 = theta[m.b3()];
    for (int j = 0; j < h; ++j)
      z3 += theta[m.w3() + static_cast<size_t>(j)] * a2[static_cast<size_t>(j)];
    const double p = sigmoid(z3);
    const double y = static_cast<double>(d.labels[r]);
    const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
    loss -= w[r] * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    if (!grad) continue;

    // backward
    const double dz3 = w[r] * (p - y) / w_total;
    (*grad)[m.b3()] += dz3;
    for (int j = 0; j < h; ++j) {
      (*grad)[m.w3() + static_cast<size_t>(j)] += dz3 * a2[static_cast<size_t>(j)];
      d2[static_cast<size_t>(j)] = dz3 * theta[m.w3() + static_cast<size_t>(j)];
    }
    for (int u = 0; u < h; ++u) {
      double da = d2[static_cast<size_t>(u)];
      if (use_mask)
        da = mask2[idx * static_cast<size_t>(h) + static_cast<size_t>(u)] ? da / keep : 0;
      const double act = a2[static_cast<size_t>(u)];
      d2[static_cast<size_t>(u)] = act > 0 ? da : 0;
    }
    std::fill(d1.begin(), d1.end(), 0.0);
    for (int u = 0; u < h; ++u) {
      const double dz = d2[static_cast<size_t>(u)];
      if (dz == 0) continue;
      (*grad)[m.b2() + static_cast<size_t>(u)] += dz;
      double* wgrad = grad->data() + m.w2() + static_cast<size_t>(u * h);
      const double* wrow = theta.data() + m.w2() + static_cast<size_t>(u * h);
      for (int j = 0; j < h; ++j) {
        wgrad[j] += dz * a1[static_cast<size_t>(j)];
        d1[static_cast<size_t>(j)] += dz * wrow[j];
      }
    }
    for (int u = 0; u < h; ++u) {
      double da = d1[static_cast<size_t>(u)];
      if (use_mask)
        da = mask1[idx * static_cast<size_t>(h) + static_cast<size_t>(u)] ? da / keep : 0;
      const double act = a1[static_cast<size_t>(u)];
      const double dz = act > 0 ? da : 0;
      if (dz == 0) continue;
      (*grad)[m.b1() + static_cast<size_t>(u)] += dz;
      double* wgrad = grad->data() + m.w1() + static_cast<size_t>(u * in);
      for (int j = 0; j < in; ++j) wgrad[j] += dz * x[static_cast<size_t>(j)];
    }
  }
  return loss / w_total;
}

}  // namespace detail

inline MlpModel train_mlp_scaled(const Dataset& scaled, MlpParams params) {
  scaled.check_consistent();
  const size_t n = scaled.n_rows();
  if (n == 0) throw std::invalid_argument("train_mlp: empty dataset");
  for (double v : scaled.values)
    if (is_missing(v)) throw std::invalid_argument("train_mlp: input must be dense");

  std::vector<double> w = scaled.weights;
  if (params.class_weighting) {
    const ClassWeights cw = class_weights(scaled.labels);
    for (size_t i = 0; i < n; ++i) w[i] *= scaled.labels[i] ? cw.w_pos : cw.w_neg;
  }

  MlpModel m;
  m.params = params;
  m.feature_names = scaled.feature_names;
  m.input_dim = static_cast<int>(scaled.n_features());
  Rng rng(params.seed);
  m.theta.resize(m.n_params());
  const int h = params.hidden;
  auto he_init = [&](size_t offset, int rows, int cols) {
    const double s = std::sqrt(2.0 / static_cast<double>(cols));
    for (int i = 0; i < rows * cols; ++i) m.theta[offset + static_cast<size_t>(i)] = rng.normal(0, s);
  };
  he_init(m.w1(), h, m.input_dim);
  he_init(m.w2(), h, h);
  he_init(m.w3(), 1, h);

  // Adam
  std::vector<double> mom(m.n_params(), 0.0), vel(m.n_params(), 0.0), grad;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t step = 0;
  const double keep = 1.0 - params.dropout;
  double initial_loss = -1;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    size_t batches = 0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(params.batch_size)) {
      const size_t end = std::min(n, start + static_cast<size_t>(params.batch_size));
      std::vector<size_t> batch(order.begin() + static_cast<long>(start),
                                order.begin() + static_cast<long>(end));
      std::vector<uint8_t> mask1, mask2;
      if (params.dropout > 0) {
        mask1.resize(batch.size() * static_cast<size_t>(h));
        mask2.resize(batch.size() * static_cast<size_t>(h));
        for (auto& b : mask1) b = rng.bernoulli(keep);
        for (auto& b : mask2) b = rng.bernoulli(keep);
      }
      const double loss =
          detail::mlp_loss_grad(m, scaled, w, batch, mask1, mask2, keep, &grad);
      if (initial_loss < 0) initial_loss = loss;
      if (!std::isfinite(loss) || loss > initial_loss * 10 + 10)
        throw std::runtime_error("train_mlp: training diverged (loss " + std::to_string(loss) +
                                 ")");
      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (size_t t = 0; t < m.theta.size(); ++t) {
        mom[t] = beta1 * mom[t] + (1 - beta1) * grad[t];
        vel[t] = beta2 * vel[t] + (1 - beta2) * grad[t] * grad[t];
        m.theta[t] -= params.learning_rate * (mom[t] / bc1) / (std::sqrt(vel[t] / bc2) + eps);
      }
      epoch_loss += loss;
      ++batches;
    }
    m.train_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  return m;
}

inline MlpModel train_mlp(const Dataset& raw, MlpParams params) {
  ScalerSpec scaler = fit_scaler(raw);
  MlpModel m = train_mlp_scaled(transform(raw, scaler), params);
  m.scaler = scaler;
  return m;
}

inline nlohmann::json mlp_to_json(const MlpModel& m) {
  return {{"format_version", 1},
          {"family", "mlp"},
          {"feature_names", m.feature_names},
          {"params",
           {{"hidden", m.params.hidden},
            {"dropout", m.params.dropout},
            {"learning_rate", m.params.learning_rate},
            {"batch_size", m.params.batch_size},
            {"epochs", m.params.epochs},
            {"class_weighting", m.params.class_weighting},
            {"seed", m.params.seed}}},
          {"scaler", m.scaler.to_json()},
          {"input_dim", m.input_dim},
          {"theta", m.theta}};
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  MlpModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& p = j.at("params");
  m.params.hidden = p.at("hidden").get<int>();
  m.params.dropout = p.at("dropout").get<double>();
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.batch_size = p.at("batch_size").get<int>();
  m.params.epochs = p.at("epochs").get<int>();
  m.params.class_weighting = p.at("class_weighting").get<bool>();
  m.params.seed = p.at("seed").get<uint64_t>();
  m.scaler = ScalerSpec::from_json(j.at("scaler"));
  m.input_dim = j.at("input_dim").get<int>();
  m.theta = j.at("theta").get<std::vector<double>>();
  return m;
}

}  // namespace nextround
