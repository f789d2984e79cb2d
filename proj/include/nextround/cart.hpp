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
#include <string>
#include <vector>

#include "nextround/grower.hpp"
#include "nextround/resample.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

struct CartParams {
  int max_depth = 8;
  double min_gain = 0.0;
  int n_bins = 255;
  bool class_weighting = false;
  // forest knobs
  int n_estimators = 133;
  bool bootstrap = true;
  bool feature_subsampling = true;  // sqrt(m) features per split
  uint64_t seed = 0;
  int threads = 1;
};

inline CartParams forest_preset() {
  CartParams p;
  p.n_estimators = 133;
  p.max_depth = 63;
  return p;
}

// Single weighted-Gini tree. Leaves hold the weighted positive fraction.
struct CartModel {
  CartParams params;
  std::vector<std::string> feature_names;
  Tree tree;

  double predict(std::span<const double> x) const {
    if (!feature_names.empty() && x.size() != feature_names.size())
      throw std::invalid_argument("feature arity mismatch");
    return tree.predict(x);
  }
};

// Bagged Gini trees; prediction averages leaf probabilities.
struct ForestModel {
  CartParams params;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;

  double predict(std::span<const double> x) const {
    if (!feature_names.empty() && x.size() != feature_names.size())
      throw std::invalid_argument("feature arity mismatch");
    double p = 0;
    for (const auto& t : trees) p += t.predict(x);
    return trees.empty() ? 0.5 : p / static_cast<double>(trees.size());
  }
};

namespace detail {

inline Tree grow_gini_tree(const BinnedMatrix& binned, const std::vector<double>& weights,
                           const std::vector<int>& labels, const CartParams& params,
                           Rng* feature_rng) {
  const size_t n = labels.size();
  std::vector<double> wp(n), wn(n);
  for (size_t i = 0; i < n; ++i) {
    wp[i] = labels[i] ? weights[i] : 0.0;
    wn[i] = labels[i] ? 0.0 : weights[i];
  }
  std::vector<uint32_t> rows;
  rows.reserve(n);
  for (size_t i = 0; i < n; ++i)
    if (weights[i] > 0) rows.push_back(static_cast<uint32_t>(i));

  GrowParams gp;
  gp.max_depth = params.max_depth;
  gp.leaf_wise = false;
  gp.split.lambda_l2 = 0.0;
  gp.split.gamma_min_gain = params.min_gain;
  gp.threads = params.threads;
  if (feature_rng && params.feature_subsampling) {
    gp.features_per_split = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(binned.n_features))));
  }
  TreeGrower<GiniCriterion> grower(binned, gp, feature_rng);
  return grower.grow(rows, wp.data(), wn.data());
}

}  // namespace detail

inline CartModel train_cart(const Dataset& d, CartParams params) {
  d.check_consistent();
  if (d.n_rows() == 0) throw std::invalid_argument("train_cart: empty dataset");
  std::vector<double> w = d.weights;
  if (params.class_weighting) {
    const ClassWeights cw = class_weights(d.labels);
    for (size_t i = 0; i < d.n_rows(); ++i) w[i] *= d.labels[i] ? cw.w_pos : cw.w_neg;
  }
  const BinnedMatrix binned = build_binned(d, static_cast<size_t>(params.n_bins), params.threads);
  CartModel m;
  m.params = params;
  m.feature_names = d.feature_names;
  m.tree = detail::grow_gini_tree(binned, w, d.labels, params, nullptr);
  return m;
}

inline ForestModel train_forest(const Dataset& d, CartParams params) {
  d.check_consistent();
  const size_t n = d.n_rows();
  if (n == 0) throw std::invalid_argument("train_forest: empty dataset");
  std::vector<double> w = d.weights;
  if (params.class_weighting) {
    const ClassWeights cw = class_weights(d.labels);
    for (size_t i = 0; i < n; ++i) w[i] *= d.labels[i] ? cw.w_pos : cw.w_neg;
  }
  const BinnedMatrix binned = build_binned(d, static_cast<size_t>(params.n_bins), params.threads);

  ForestModel m;
  m.params = params;
  m.feature_names = d.feature_names;
  Rng base(params.seed);
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng tree_rng = base.fork(static_cast<uint64_t>(t));
    std::vector<double> wt = w;
    if (params.bootstrap) {
      std::vector<uint32_t> counts(n, 0);
      for (size_t i = 0; i < n; ++i) ++counts[tree_rng.below(n)];
      for (size_t i = 0; i < n; ++i) wt[i] = w[i] * static_cast<double>(counts[i]);
    }
    Rng* feat_rng = params.feature_subsampling ? &tree_rng : nullptr;
    m.trees.push_back(detail::grow_gini_tree(binned, wt, d.labels, params, feat_rng));
  }
  return m;
}

inline nlohmann::json cart_params_json(const CartParams& p) {
  return {{"max_depth", p.max_depth},
          {"min_gain", p.min_gain},
          {"n_bins", p.n_bins},
          {"class_weighting", p.class_weighting},
          {"n_estimators", p.n_estimators},
          {"bootstrap", p.bootstrap},
          {"feature_subsampling", p.feature_subsampling},
          {"seed", p.seed}};
}

inline CartParams cart_params_from_json(const nlohmann::json& j) {
  CartParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.min_gain = j.at("min_gain").get<double>();
  p.n_bins = j.at("n_bins").get<int>();
  p.class_weighting = j.at("class_weighting").get<bool>();
  p.n_estimators = j.at("n_estimators").get<int>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.feature_subsampling = j.at("feature_subsampling").get<bool>();
  p.seed = j.at("seed").get<uint64_t>();
  return p;
}

inline nlohmann::json cart_to_json(const CartModel& m) {
  return {{"format_version", 1},
          {"family", "cart"},
          {"feature_names", m.feature_names},
          {"params", cart_params_json(m.params)},
          {"tree", tree_to_json(m.tree)}};
}

inline CartModel cart_from_json(const nlohmann::json& j) {
  CartModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.params = cart_params_from_json(j.at("params"));
  m.tree = tree_from_json(j.at("tree"));
  return m;
}

inline nlohmann::json forest_to_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  return {{"format_version", 1},
          {"family", "forest"},
          {"feature_names", m.feature_names},
          {"params", cart_params_json(m.params)},
          {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.params = cart_params_from_json(j.at("params"));
  for (const auto& jt : j.at("trees")) m.trees.push_back(tree_from_json(jt));
  return m;
}

}  // namespace nextround
