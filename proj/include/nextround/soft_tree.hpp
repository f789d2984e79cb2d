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

enum class SoftTreeInference { AveragePath, MaxPath };

struct SoftTreeParams {
  int depth = 8;
  double beta = 1.0;            // gate inverse temperature
  double balance_coef = 0.1;    // halves per depth level
  SoftTreeInference inference = SoftTreeInference::AveragePath;
  double learning_rate = 1e-2;
  int batch_size = 256;
  int epochs = 40;
  bool class_weighting = false;
  uint64_t seed = 0;
};

// Soft binary tree of depth d: 2^d - 1 inner gates (heap order, children of i
// at 2i+1 / 2i+2), 2^d leaves with two class logits each. A gate's sigmoid is
// the probability of routing right; leaf path probabilities always sum to 1.
struct SoftTreeModel {
  SoftTreeParams params;
  std::vector<std::string> feature_names;
  ScalerSpec scaler;
  int input_dim = 0;
  std::vector<double> gate_w;      // n_inner * input_dim
  std::vector<double> gate_b;      // n_inner
  std::vector<double> leaf_logits; // n_leaves * 2
  std::vector<double> train_loss;

  int n_inner() const { return (1 << params.depth) - 1; }
  int n_leaves() const { return 1 << params.depth; }

  double gate(int node, std::span<const double> x) const {
    double z = gate_b[static_cast<size_t>(node)];
    const double* w = gate_w.data() + static_cast<size_t>(node) * static_cast<size_t>(input_dim);
    for (int j = 0; j < input_dim; ++j) z += w[j] * x[static_cast<size_t>(j)];
    return sigmoid(params.beta * z);
  }

  // P(leaf | x) for every leaf.
  std::vector<double> leaf_probabilities(std::span<const double> x) const {
    std::vector<double> path(static_cast<size_t>(n_inner() + n_leaves()), 0.0);
    path[0] = 1.0;
    for (int i = 0; i < n_inner(); ++i) {
      const double g = gate(i, x);
      path[static_cast<size_t>(2 * i + 1)] += path[static_cast<size_t>(i)] * (1.0 - g);
      path[static_cast<size_t>(2 * i + 2)] += path[static_cast<size_t>(i)] * g;
    }
    return std::vector<double>(path.begin() + n_inner(), path.end());
  }

  double leaf_positive(int leaf) const {
    const double l0 = leaf_logits[static_cast<size_t>(2 * leaf)];
    const double l1 = leaf_logits[static_cast<size_t>(2 * leaf + 1)];
    return sigmoid(l1 - l0);  // softmax over two logits
  }

  double predict_scaled(std::span<const double> x) const {
    if (params.inference == SoftTreeInference::MaxPath) {
      int node = 0;
      for (int level = 0; level < params.depth; ++level) {
        node = gate(node, x) >= 0.5 ? 2 * node + 2 : 2 * node + 1;
      }
      return leaf_positive(node - n_inner());
    }
    const auto probs = leaf_probabilities(x);
    double p = 0;
    for (int l = 0; l < n_leaves(); ++l) p += probs[static_cast<size_t>(l)] * leaf_positive(l);
    return p;
  }

  double predict(std::span<const double> x_raw) const {
    if (static_cast<int>(x_raw.size()) != input_dim)
      throw std::invalid_argument("feature arity mismatch");
    return predict_scaled(scaler.transform_copy(x_raw));
  }
};

namespace detail {

inline int heap_depth(int node) {
  int depth = 0;
  while (node > 0) {
    node = (node - 1) / 2;
    ++depth;
  }
  return depth;
}

// Full loss over the given rows: path-probability-weighted cross-entropy plus
// the gate-balance penalty (coefficient decaying by node depth). Gradients
// accumulate into the three parameter blocks when requested.
inline double soft_tree_loss_grad(const SoftTreeModel& m, const Dataset& d,
                                  const std::vector<double>& w, const std::vector<size_t>& rows,
                                  std::vector<double>* grad_w, std::vector<double>* grad_b,
                                  std::vector<double>* grad_leaf) {
  const int n_inner = m.n_inner();
  const int n_leaves = m.n_leaves();
  const int in = m.input_dim;
  const size_t nb = rows.size();

  double w_total = 0;
  for (size_t r : rows) w_total += w[r];

  // forward pass, stored per sample
  std::vector<double> path(nb * static_cast<size_t>(n_inner + n_leaves), 0.0);
  std::vector<double> gates(nb * static_cast<size_t>(n_inner));
  for (size_t s = 0; s < nb; ++s) {
    auto x = d.row(rows[s]);
    double* p = path.data() + s * static_cast<size_t>(n_inner + n_leaves);
    double* g = gates.data() + s * static_cast<size_t>(n_inner);
    p[0] = 1.0;
    for (int i = 0; i < n_inner; ++i) {
      g[i] = m.gate(i, x);
      p[2 * i + 1] += p[i] * (1.0 - g[i]);
      p[2 * i + 2] += p[i] * g[i];
    }
  }

  // batch gate-balance statistics: alpha_i = sum w P g / sum w P
  std::vector<double> A(static_cast<size_t>(n_inner), 0.0), B(static_cast<size_t>(n_inner), 0.0);
  for (size_t s = 0; s < nb; ++s) {
    const double ws = w[rows[s]];
    const double* p = path.data() + s * static_cast<size_t>(n_inner + n_leaves);
    const double* g = gates.data() + s * static_cast<size_t>(n_inner);
    for (int i = 0; i < n_inner; ++i) {
      A[static_cast<size_t>(i)] += ws * p[i] * g[i];
      B[static_cast<size_t>(i)] += ws * p[i];
    }
  }

  double loss = 0;
  std::vector<double> dpen_dA(static_cast<size_t>(n_inner), 0.0);
  std::vector<double> dpen_dB(static_cast<size_t>(n_inner), 0.0);
  for (int i = 0; i < n_inner; ++i) {
    if (B[static_cast<size_t>(i)] <= 0) continue;
    const double alpha =
        std::clamp(A[static_cast<size_t>(i)] / B[static_cast<size_t>(i)], 1e-12, 1.0 - 1e-12);
    const double coef = m.params.balance_coef * std::pow(2.0, -heap_depth(i));
    loss += coef * (-0.5) * (std::log(alpha) + std::log(1.0 - alpha));
    const double dpen_dalpha = coef * (-0.5) * (1.0 / alpha - 1.0 / (1.0 - alpha));
    dpen_dA[static_cast<size_t>(i)] = dpen_dalpha / B[static_cast<size_t>(i)];
    dpen_dB[static_cast<size_t>(i)] =
        -dpen_dalpha * A[static_cast<size_t>(i)] / (B[static_cast<size_t>(i)] * B[static_cast<size_t>(i)]);
  }

  if (grad_w) {
    grad_w->assign(static_cast<size_t>(n_inner * in), 0.0);
    grad_b->assign(static_cast<size_t>(n_inner), 0.0);
    grad_leaf->assign(static_cast<size_t>(n_leaves * 2), 0.0);
  }

  std::vector<double> dP(static_cast<size_t>(n_inner + n_leaves));
  std::vector<double> dG(static_cast<size_t>(n_inner));
  for (size_t s = 0; s < nb; ++s) {
    const size_t r = rows[s];
    const double ws = w[r];
    const int y = d.labels[r];
    auto x = d.row(r);
    const double* p = path.data() + s * static_cast<size_t>(n_inner + n_leaves);
    const double* g = gates.data() + s * static_cast<size_t>(n_inner);

    // cross entropy: -sum_leaf P_leaf * log Q_leaf[y]
    std::fill(dP.begin(), dP.end(), 0.0);
    std::fill(dG.begin(), dG.end(), 0.0);
    for (int l = 0; l < n_leaves; ++l) {
      const double l0 = m.leaf_logits[static_cast<size_t>(2 * l)];
      const double l1 = m.leaf_logits[static_cast<size_t>(2 * l + 1)];
      const double mx = std::max(l0, l1);
      const double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
      const double z = e0 + e1;
      const double q0 = e0 / z, q1 = e1 / z;
      const double qy = std::clamp(y ? q1 : q0, 1e-15, 1.0);
      const double pl = p[n_inner + l];
      loss -= ws / w_total * pl * std::log(qy);
      if (grad_w) {
        dP[static_cast<size_t>(n_inner + l)] += ws / w_total * (-std::log(qy));
        const double scale = ws / w_total * pl;
        (*grad_leaf)[static_cast<size_t>(2 * l)] += scale * (q0 - (y ? 0.0 : 1.0));
        (*grad_leaf)[static_cast<size_t>(2 * l + 1)] += scale * (q1 - (y ? 1.0 : 0.0));
      }
    }
    if (!grad_w) continue;

    // penalty terms touch every inner node's P and gate directly
    for (int i = 0; i < n_inner; ++i) {
      dP[static_cast<size_t>(i)] +=
          dpen_dA[static_cast<size_t>(i)] * ws * g[i] + dpen_dB[static_cast<size_t>(i)] * ws;
      dG[static_cast<size_t>(i)] += dpen_dA[static_cast<size_t>(i)] * ws * p[i];
    }

    // reverse sweep: children's dP flow into parent dP and the parent's gate
    for (int i = n_inner - 1; i >= 0; --i) {
      const double dleft = dP[static_cast<size_t>(2 * i + 1)];
      const double dright = dP[static_cast<size_t>(2 * i + 2)];
      dP[static_cast<size_t>(i)] += dleft * (1.0 - g[i]) + dright * g[i];
      dG[static_cast<size_t>(i)] += p[i] * (dright - dleft);
    }

    for (int i = 0; i < n_inner; ++i) {
      const double dz = dG[static_cast<size_t>(i)] * m.params.beta * g[i] * (1.0 - g[i]);
      if (dz == 0) continue;
      (*grad_b)[static_cast<size_t>(i)] += dz;
      double* gw = grad_w->data() + static_cast<size_t>(i) * static_cast<size_t>(in);
      for (int j = 0; j < in; ++j) gw[j] += dz * x[static_cast<size_t>(j)];
    }
  }
  return loss;
}

}  // namespace detail

inline SoftTreeModel train_soft_tree_scaled(const Dataset& scaled, SoftTreeParams params) {
  scaled.check_consistent();
  const size_t n = scaled.n_rows();
  if (n == 0) throw std::invalid_argument("train_soft_tree: empty dataset");
  for (double v : scaled.values)
    if (is_missing(v)) throw std::invalid_argument("train_soft_tree: input must be dense");

  std::vector<double> w = scaled.weights;
  if (params.class_weighting) {
    const ClassWeights cw = class_weights(scaled.labels);
    for (size_t i = 0; i < n; ++i) w[i] *= scaled.labels[i] ? cw.w_pos : cw.w_neg;
  }

  SoftTreeModel m;
  m.params = params;
  m.feature_names = scaled.feature_names;
  m.input_dim = static_cast<int>(scaled.n_features());
  Rng rng(params.seed);
  m.gate_w.resize(static_cast<size_t>(m.n_inner()) * static_cast<size_t>(m.input_dim));
  m.gate_b.resize(static_cast<size_t>(m.n_inner()));
  m.leaf_logits.resize(static_cast<size_t>(m.n_leaves()) * 2);
  const double s = 1.0 / std::sqrt(static_cast<double>(m.input_dim));
  for (auto& v : m.gate_w) v = rng.normal(0, s);
  for (auto& v : m.gate_b) v = rng.normal(0, 0.01);
  for (auto& v : m.leaf_logits) v = rng.normal(0, 0.01);

  const size_t n_theta = m.gate_w.size() + m.gate_b.size() + m.leaf_logits.size();
  std::vector<double> mom(n_theta, 0.0), vel(n_theta, 0.0);
  std::vector<double> gw, gb, gl;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t step = 0;
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
      const double loss = detail::soft_tree_loss_grad(m, scaled, w, batch, &gw, &gb, &gl);
      if (initial_loss < 0) initial_loss = loss;
      if (!std::isfinite(loss) || loss > initial_loss * 10 + 10)
        throw std::runtime_error("train_soft_tree: training diverged");
      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto adam = [&](std::vector<double>& theta, const std::vector<double>& grad, size_t off) {
        for (size_t t = 0; t < theta.size(); ++t) {
          mom[off + t] = beta1 * mom[off + t] + (1 - beta1) * grad[t];
          vel[off + t] = beta2 * vel[off + t] + (1 - beta2) * grad[t] * grad[t];
          theta[t] -=
              params.learning_rate * (mom[off + t] / bc1) / (std::sqrt(vel[off + t] / bc2) + eps);
        }
      };
      adam(m.gate_w, gw, 0);
      adam(m.gate_b, gb, m.gate_w.size());
      adam(m.leaf_logits, gl, m.gate_w.size() + m.gate_b.size());
      epoch_loss += loss;
      ++batches;
    }
    m.train_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  return m;
}

inline SoftTreeModel train_soft_tree(const Dataset& raw, SoftTreeParams params) {
  ScalerSpec scaler = fit_scaler(raw);
  SoftTreeModel m = train_soft_tree_scaled(transform(raw, scaler), params);
  m.scaler = scaler;
  return m;
}

inline nlohmann::json soft_tree_to_json(const SoftTreeModel& m) {
  return {{"format_version", 1},
          {"family", "softtree"},
          {"feature_names", m.feature_names},
          {"params",
           {{"depth", m.params.depth},
            {"beta", m.params.beta},
            {"balance_coef", m.params.balance_coef},
            {"inference",
             m.params.inference == SoftTreeInference::AveragePath ? "average_path" : "max_path"},
            {"learning_rate", m.params.learning_rate},
            {"batch_size", m.params.batch_size},
            {"epochs", m.params.epochs},
            {"class_weighting", m.params.class_weighting},
            {"seed", m.params.seed}}},
          {"scaler", m.scaler.to_json()},
          {"input_dim", m.input_dim},
          {"gate_w", m.gate_w},
          {"gate_b", m.gate_b},
          {"leaf_logits", m.leaf_logits}};
}

inline SoftTreeModel soft_tree_from_json(const nlohmann::json& j) {
  SoftTreeModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& p = j.at("params");
  m.params.depth = p.at("depth").get<int>();
  m.params.beta = p.at("beta").get<double>();
  m.params.balance_coef = p.at("balance_coef").get<double>();
  m.params.inference = p.at("inference").get<std::string>() == "max_path"
                           ? SoftTreeInference::MaxPath
                           : SoftTreeInference::AveragePath;
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.batch_size = p.at("batch_size").get<int>();
  m.params.epochs = p.at("epochs").get<int>();
  m.params.class_weighting = p.at("class_weighting").get<bool>();
  m.params.seed = p.at("seed").get<uint64_t>();
  m.scaler = ScalerSpec::from_json(j.at("scaler"));
  m.input_dim = j.at("input_dim").get<int>();
  m.gate_w = j.at("gate_w").get<std::vector<double>>();
  m.gate_b = j.at("gate_b").get<std::vector<double>>();
  m.leaf_logits = j.at("leaf_logits").get<std::vector<double>>();
  return m;
}

}  // namespace nextround
