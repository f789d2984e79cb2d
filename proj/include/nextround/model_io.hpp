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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/cart.hpp"
#include "nextround/gbdt.hpp"
#include "nextround/knn.hpp"
#include "nextround/linear.hpp"
#include "nextround/mlp.hpp"
#include "nextround/resample.hpp"
#include "nextround/soft_tree.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Any trained model family behind one predict() surface. Models trained on a
// SMOTE pipeline carry the training imputation vector so raw sparse rows are
// imputed the same way at prediction time.
struct AnyModel {
  std::string family;                       // logreg|knn|cart|forest|gbdt-xgb|gbdt-lgbm|softtree|mlp
  std::string strategy = "none";            // none|smote|weight
  std::variant<LogregModel, KnnModel, CartModel, ForestModel, GbdtModel, SoftTreeModel, MlpModel>
      model;
  std::optional<std::vector<double>> impute_medians;

  double predict(std::span<const double> x_raw) const {
    std::vector<double> buf;
    std::span<const double> x = x_raw;
    if (impute_medians) {
      buf.assign(x_raw.begin(), x_raw.end());
      for (size_t j = 0; j < buf.size() && j < impute_medians->size(); ++j)
        if (is_missing(buf[j])) buf[j] = (*impute_medians)[j];
      x = buf;
    }
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
  }

  std::vector<double> predict_all(const Dataset& d) const {
    std::vector<double> out(d.n_rows());
    for (size_t i = 0; i < d.n_rows(); ++i) out[i] = predict(d.row(i));
    return out;
  }

  const GbdtModel* as_gbdt() const { return std::get_if<GbdtModel>(&model); }
};

inline nlohmann::json model_to_json(const AnyModel& m) {
  nlohmann::json j = std::visit(
      [](const auto& inner) -> nlohmann::json {
        using T = std::decay_t<decltype(inner)>;
        if constexpr (std::is_same_v<T, LogregModel>) return logreg_to_json(inner);
        else if constexpr (std::is_same_v<T, KnnModel>) return knn_to_json(inner);
        else if constexpr (std::is_same_v<T, CartModel>) return cart_to_json(inner);
        else if constexpr (std::is_same_v<T, ForestModel>) return forest_to_json(inner);
        else if constexpr (std::is_same_v<T, GbdtModel>) return gbdt_to_json(inner);
        else if constexpr (std::is_same_v<T, SoftTreeModel>) return soft_tree_to_json(inner);
        else return mlp_to_json(inner);
      },
      m.model);
  j["family"] = m.family;
  j["strategy"] = m.strategy;
  if (m.impute_medians) j["impute_medians"] = *m.impute_medians;
  return j;
}

inline AnyModel model_from_json(const nlohmann::json& j) {
  AnyModel m;
  m.family = j.at("family").get<std::string>();
  m.strategy = j.value("strategy", "none");
  if (j.contains("impute_medians"))
    m.impute_medians = j.at("impute_medians").get<std::vector<double>>();
  const std::string base = m.family.rfind("gbdt", 0) == 0 ? "gbdt" : m.family;
  if (base == "logreg") m.model = logreg_from_json(j);
  else if (base == "knn") m.model = knn_from_json(j);
  else if (base == "cart") m.model = cart_from_json(j);
  else if (base == "forest") m.model = forest_from_json(j);
  else if (base == "gbdt") m.model = gbdt_from_json(j);
  else if (base == "softtree") m.model = soft_tree_from_json(j);
  else if (base == "mlp") m.model = mlp_from_json(j);
  else throw std::runtime_error("unknown model family: " + m.family);
  return m;
}

inline void save_model(const AnyModel& m, const std::string& path) {
  write_text_file(path, model_to_json(m).dump(2) + "\n");
}

inline AnyModel load_model(const std::string& path) {
  return model_from_json(nlohmann::json::parse(read_text_file(path)));
}

// Declarative training request, as the CLI sees it.
struct TrainSpec {
  std::string family = "gbdt-lgbm";
  ImbalanceStrategy strategy = ImbalanceStrategy::None;
  nlohmann::json overrides;  // family-specific parameter overrides
  uint64_t seed = 0;
  int threads = 1;
};

inline ImbalanceStrategy parse_strategy(const std::string& s) {
  if (s == "none") return ImbalanceStrategy::None;
  if (s == "smote") return ImbalanceStrategy::Smote;
  if (s == "weight") return ImbalanceStrategy::WeightAdjust;
  throw std::invalid_argument("unknown strategy: " + s);
}

inline std::string_view strategy_name(ImbalanceStrategy s) {
  switch (s) {
    case ImbalanceStrategy::None: return "none";
    case ImbalanceStrategy::Smote: return "smote";
    case ImbalanceStrategy::WeightAdjust: return "weight";
  }
  return "none";
}

namespace detail {

template <typename T>
void maybe_set(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline BoostParams boost_params_for(const std::string& family, const nlohmann::json& o,
                                    uint64_t seed, int threads, bool class_weighting) {
  BoostParams p = family == "gbdt-xgb" ? xgb_preset() : lgbm_preset();
  maybe_set(o, "n_estimators", p.n_estimators);
  maybe_set(o, "max_depth", p.max_depth);
  maybe_set(o, "max_leaves", p.max_leaves);
  maybe_set(o, "learning_rate", p.learning_rate);
  maybe_set(o, "lambda_l2", p.lambda_l2);
  maybe_set(o, "gamma_min_gain", p.gamma_min_gain);
  maybe_set(o, "n_bins", p.n_bins);
  if (o.contains("goss_top_rate"))
    p.goss = GossConfig{o.at("goss_top_rate").get<double>(),
                        o.value("goss_other_rate", 0.1)};
  p.class_weighting = class_weighting;
  p.seed = seed;
  p.threads = threads;
  return p;
}

}  // namespace detail

// Trains one model family under one imbalance strategy. SMOTE pipelines
// impute first (the vector rides along in the model); weight pipelines keep
// sparse input intact and push class weights into the loss or split gain.
inline AnyModel train_model(const Dataset& raw, const TrainSpec& spec) {
  using detail::maybe_set;
  const bool weight = spec.strategy == ImbalanceStrategy::WeightAdjust;
  AnyModel out;
  out.family = spec.family;
  out.strategy = std::string(strategy_name(spec.strategy));

  Dataset train = raw;
  if (spec.strategy == ImbalanceStrategy::Smote) {
    ImputationVector iv;
    train = impute_median(train, &iv);
    ImbalancePlan plan;
    plan.strategy = ImbalanceStrategy::Smote;
    maybe_set(spec.overrides, "k_neighbors", plan.k_neighbors);
    plan.seed = spec.seed;
    plan.threads = spec.threads;
    train = smote(train, plan);
    out.impute_medians = iv.medians;
  }

  const nlohmann::json& o = spec.overrides;
  if (spec.family == "logreg") {
    LogregParams p;
    maybe_set(o, "l2", p.l2);
    maybe_set(o, "epochs", p.epochs);
    maybe_set(o, "learning_rate", p.learning_rate);
    p.class_weighting = weight;
    out.model = train_logreg(train, p);
  } else if (spec.family == "knn") {
    int k = 5;
    maybe_set(o, "k", k);
    out.model = train_knn(train, k, weight);
  } else if (spec.family == "cart") {
    CartParams p;
    maybe_set(o, "max_depth", p.max_depth);
    maybe_set(o, "n_bins", p.n_bins);
    p.class_weighting = weight;
    p.threads = spec.threads;
    out.model = train_cart(train, p);
  } else if (spec.family == "forest") {
    CartParams p = forest_preset();
    maybe_set(o, "max_depth", p.max_depth);
    maybe_set(o, "n_estimators", p.n_estimators);
    maybe_set(o, "n_bins", p.n_bins);
    p.class_weighting = weight;
    p.seed = spec.seed;
    p.threads = spec.threads;
    out.model = train_forest(train, p);
  } else if (spec.family == "gbdt-xgb" || spec.family == "gbdt-lgbm" || spec.family == "gbdt") {
    out.model = train_gbdt(train, detail::boost_params_for(spec.family, o, spec.seed,
                                                           spec.threads, weight));
  } else if (spec.family == "softtree") {
    SoftTreeParams p;
    maybe_set(o, "depth", p.depth);
    maybe_set(o, "epochs", p.epochs);
    maybe_set(o, "learning_rate", p.learning_rate);
    maybe_set(o, "batch_size", p.batch_size);
    p.class_weighting = weight;
    p.seed = spec.seed;
    out.model = train_soft_tree(train, p);
  } else if (spec.family == "mlp") {
    MlpParams p;
    maybe_set(o, "hidden", p.hidden);
    maybe_set(o, "epochs", p.epochs);
    maybe_set(o, "learning_rate", p.learning_rate);
    maybe_set(o, "batch_size", p.batch_size);
    maybe_set(o, "dropout", p.dropout);
    p.class_weighting = weight;
    p.seed = spec.seed;
    out.model = train_mlp(train, p);
  } else {
    throw std::invalid_argument("unknown model family: " + spec.family);
  }
  return out;
}

}  // namespace nextround
