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
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nextround/csv.hpp"
#include "nextround/gbdt.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Per-prediction feature attribution in margin (log-odds) space.
// Local accuracy: base_value + sum(phi) == model margin, exactly.
struct Attribution {
  double base_value = 0;
  std::vector<double> phi;
  double model_output = 0;  // margin
  double probability = 0;   // sigmoid(margin), for display
};

// Total split gain per feature. Features never split on get 0.
inline std::vector<double> gain_importance(const std::vector<Tree>& trees, size_t n_features) {
  std::vector<double> importance(n_features, 0.0);
  for (const auto& t : trees)
    for (const auto& n : t.nodes)
      if (!n.is_leaf()) importance[static_cast<size_t>(n.feature)] += n.gain;
  return importance;
}

inline std::vector<double> gain_importance(const GbdtModel& m) {
  return gain_importance(m.trees, m.feature_names.size());
}

namespace detail {

// Cover-weighted expectation of one tree's output.
inline double tree_expected_value(const Tree& t, int node = 0) {
  const TreeNode& n = t.nodes[static_cast<size_t>(node)];
  if (n.is_leaf()) return n.value;
  const double wl = t.nodes[static_cast<size_t>(n.left)].cover;
  const double wr = t.nodes[static_cast<size_t>(n.right)].cover;
  const double w = wl + wr;
  if (w <= 0) return 0;
  return (wl * tree_expected_value(t, n.left) + wr * tree_expected_value(t, n.right)) / w;
}

inline int tree_depth(const Tree& t, int node = 0) {
  const TreeNode& n = t.nodes[static_cast<size_t>(node)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(tree_depth(t, n.left), tree_depth(t, n.right));
}

struct PathElement {
  int feature = -1;
  double zero_fraction = 0;  // share of cover that flows through when excluded
  double one_fraction = 0;   // 1 when x follows this split, else 0
  double pweight = 0;
};

inline void extend_path(PathElement* path, int unique_depth, double zero_fraction,
                        double one_fraction, int feature) {
  path[unique_depth] = PathElement{feature, zero_fraction, one_fraction,
                                   unique_depth == 0 ? 1.0 : 0.0};
  for (int i = unique_depth - 1; i >= 0; --i) {
    path[i + 1].pweight +=
        one_fraction * path[i].pweight * (i + 1) / static_cast<double>(unique_depth + 1);
    path[i].pweight =
        zero_fraction * path[i].pweight * (unique_depth - i) / static_cast<double>(unique_depth + 1);
  }
}

inline void unwind_path(PathElement* path, int unique_depth, int path_index) {
  const double one_fraction = path[path_index].one_fraction;
  const double zero_fraction = path[path_index].zero_fraction;
  double next_one_portion = path[unique_depth].pweight;
  for (int i = unique_depth - 1; i >= 0; --i) {
    if (one_fraction != 0) {
      const double tmp = path[i].pweight;
      path[i].pweight =
          next_one_portion * (unique_depth + 1) / static_cast<double>((i + 1) * one_fraction);
      next_one_portion =
          tmp - path[i].pweight * zero_fraction * (unique_depth - i) /
                    static_cast<double>(unique_depth + 1);
    } else {
      path[i].pweight = path[i].pweight * (unique_depth + 1) /
                        (zero_fraction * static_cast<double>(unique_depth - i));
    }
  }
  for (int i = path_index; i < unique_depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

inline double unwound_path_sum(const PathElement* path, int unique_depth, int path_index) {
  const double one_fraction = path[path_index].one_fraction;
  const double zero_fraction = path[path_index].zero_fraction;
  double next_one_portion = path[unique_depth].pweight;
  double total = 0;
  if (one_fraction != 0) {
    for (int i = unique_depth - 1; i >= 0; --i) {
      const double tmp = next_one_portion / static_cast<double>((i + 1) * one_fraction);
      total += tmp;
      next_one_portion = path[i].pweight - tmp * zero_fraction * (unique_depth - i);
    }
  } else {
    for (int i = unique_depth - 1; i >= 0; --i) {
      total += path[i].pweight / (zero_fraction * static_cast<double>(unique_depth - i));
    }
  }
  return total * (unique_depth + 1);
}

inline void tree_shap_recurse(const Tree& t, std::span<const double> x, std::vector<double>& phi,
                              int node_index, int unique_depth, PathElement* parent_path,
                              double parent_zero_fraction, double parent_one_fraction,
                              int parent_feature) {
  PathElement* path = parent_path + unique_depth;
  std::copy(parent_path, parent_path + unique_depth, path);
  extend_path(path, unique_depth, parent_zero_fraction, parent_one_fraction, parent_feature);

  const TreeNode& node = t.nodes[static_cast<size_t>(node_index)];
  if (node.is_leaf()) {
    for (int i = 1; i <= unique_depth; ++i) {
      const double w = unwound_path_sum(path, unique_depth, i);
      const PathElement& el = path[i];
      phi[static_cast<size_t>(el.feature)] +=
          w * (el.one_fraction - el.zero_fraction) * node.value;
    }
    return;
  }

  const double v = x[static_cast<size_t>(node.feature)];
  const bool go_left = is_missing(v) ? node.default_left : v <= node.threshold;
  const int hot = go_left ? node.left : node.right;
  const int cold = go_left ? node.right : node.left;
  const double cover = t.nodes[static_cast<size_t>(node.left)].cover +
                       t.nodes[static_cast<size_t>(node.right)].cover;
  const double hot_zero_fraction = t.nodes[static_cast<size_t>(hot)].cover / cover;
  const double cold_zero_fraction = t.nodes[static_cast<size_t>(cold)].cover / cover;
  double incoming_zero_fraction = 1;
  double incoming_one_fraction = 1;

  // If this feature already appears on the path, undo its entry and fold its
  // fractions into the new one.
  int path_index = 0;
  for (; path_index <= unique_depth; ++path_index)
    if (path[path_index].feature == node.feature) break;
  if (path_index != unique_depth + 1) {
    incoming_zero_fraction = path[path_index].zero_fraction;
    incoming_one_fraction = path[path_index].one_fraction;
    unwind_path(path, unique_depth, path_index);
    unique_depth -= 1;
  }

  tree_shap_recurse(t, x, phi, hot, unique_depth + 1, path,
                    hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
                    node.feature);
  tree_shap_recurse(t, x, phi, cold, unique_depth + 1, path,
                    cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

// phi contributions of a single tree (unscaled).
inline void tree_shap_single(const Tree& t, std::span<const double> x, std::vector<double>& phi) {
  if (t.nodes.size() == 1) return;  // constant tree contributes only to the base
  const int depth = tree_depth(t);
  std::vector<PathElement> buffer(static_cast<size_t>((depth + 2) * (depth + 3)) / 2);
  tree_shap_recurse(t, x, phi, 0, 0, buffer.data(), 1.0, 1.0, -1);
}

inline std::set<int> used_features(const Tree& t) {
  std::set<int> used;
  for (const auto& n : t.nodes)
    if (!n.is_leaf()) used.insert(n.feature);
  return used;
}

// Conditional expectation with the features in `fixed` pinned to x: excluded
// features average both children, cover-weighted.
inline double conditional_expectation(const Tree& t, std::span<const double> x,
                                      const std::set<int>& fixed, int node_index = 0) {
  const TreeNode& node = t.nodes[static_cast<size_t>(node_index)];
  if (node.is_leaf()) return node.value;
  if (fixed.count(node.feature)) {
    const double v = x[static_cast<size_t>(node.feature)];
    const bool go_left = is_missing(v) ? node.default_left : v <= node.threshold;
    return conditional_expectation(t, x, fixed, go_left ? node.left : node.right);
  }
  const double wl = t.nodes[static_cast<size_t>(node.left)].cover;
  const double wr = t.nodes[static_cast<size_t>(node.right)].cover;
  return (wl * conditional_expectation(t, x, fixed, node.left) +
          wr * conditional_expectation(t, x, fixed, node.right)) /
         (wl + wr);
}

}  // namespace detail

// Path-dependent TreeSHAP over the ensemble, polynomial time. Missing values
// in x are legal: an included feature routes through the learned default
// direction, exactly as prediction does.
inline Attribution tree_shap(const GbdtModel& m, std::span<const double> x) {
  if (x.size() != m.feature_names.size())
    throw std::invalid_argument("tree_shap: feature arity mismatch");
  Attribution a;
  a.phi.assign(m.feature_names.size(), 0.0);
  a.base_value = m.base_score;
  std::vector<double> tree_phi(m.feature_names.size());
  for (const auto& t : m.trees) {
    std::fill(tree_phi.begin(), tree_phi.end(), 0.0);
    detail::tree_shap_single(t, x, tree_phi);
    for (size_t j = 0; j < tree_phi.size(); ++j)
      a.phi[j] += m.params.learning_rate * tree_phi[j];
    a.base_value += m.params.learning_rate * detail::tree_expected_value(t);
  }
  a.model_output = m.margin(x);
  a.probability = sigmoid(a.model_output);
  return a;
}

// Exact Shapley values by subset enumeration over the features each tree
// actually uses. Exponential; refuses trees with more than max_features
// distinct split features.
inline Attribution shapley_bruteforce(const GbdtModel& m, std::span<const double> x,
                                      int max_features = 12) {
  if (x.size() != m.feature_names.size())
    throw std::invalid_argument("shapley_bruteforce: feature arity mismatch");
  Attribution a;
  a.phi.assign(m.feature_names.size(), 0.0);
  a.base_value = m.base_score;

  for (const auto& t : m.trees) {
    const std::set<int> used_set = detail::used_features(t);
    if (static_cast<int>(used_set.size()) > max_features)
      throw std::invalid_argument("shapley_bruteforce: tree uses too many features");
    const std::vector<int> used(used_set.begin(), used_set.end());
    const size_t k = used.size();
    a.base_value += m.params.learning_rate * detail::tree_expected_value(t);
    if (k == 0) continue;

    // factorial weights over subset sizes of the k participating features
    std::vector<double> fact(k + 1, 1.0);
    for (size_t i = 1; i <= k; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    // value of every subset, indexed by bitmask
    std::vector<double> value(size_t{1} << k);
    for (size_t mask = 0; mask < value.size(); ++mask) {
      std::set<int> fixed;
      for (size_t b = 0; b < k; ++b)
        if (mask & (size_t{1} << b)) fixed.insert(used[b]);
      value[mask] = detail::conditional_expectation(t, x, fixed);
    }
    for (size_t b = 0; b < k; ++b) {
      double phi = 0;
      for (size_t mask = 0; mask < value.size(); ++mask) {
        if (mask & (size_t{1} << b)) continue;
        const size_t s = static_cast<size_t>(std::popcount(mask));
        const double weight = fact[s] * fact[k - s - 1] / fact[k];
        phi += weight * (value[mask | (size_t{1} << b)] - value[mask]);
      }
      a.phi[static_cast<size_t>(used[b])] += m.params.learning_rate * phi;
    }
  }
  a.model_output = m.margin(x);
  a.probability = sigmoid(a.model_output);
  return a;
}

struct ContributionRow {
  std::string factor;
  double value = 0;  // raw feature value (NaN when missing)
  double phi = 0;
  char direction = '+';
};

struct ExplainReport {
  Attribution attribution;
  std::vector<ContributionRow> rows;  // sorted by |phi| descending
};

inline ExplainReport explain_report(const GbdtModel& m, std::span<const double> x) {
  ExplainReport rep;
  rep.attribution = tree_shap(m, x);
  for (size_t j = 0; j < m.feature_names.size(); ++j) {
    ContributionRow row;
    row.factor = m.feature_names[j];
    row.value = x[j];
    row.phi = rep.attribution.phi[j];
    row.direction = row.phi >= 0 ? '+' : '-';
    rep.rows.push_back(std::move(row));
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const ContributionRow& a,
                                                 const ContributionRow& b) {
    return std::fabs(a.phi) != std::fabs(b.phi) ? std::fabs(a.phi) > std::fabs(b.phi)
                                                : a.factor < b.factor;
  });
  return rep;
}

inline std::string attribution_csv(const ExplainReport& rep) {
  std::string out = "factor,value,phi,direction\n";
  for (const auto& r : rep.rows) {
    write_csv_row(out, {r.factor, is_missing(r.value) ? "" : format_double(r.value),
                        format_double(r.phi), std::string(1, r.direction)});
  }
  return out;
}

inline nlohmann::json attribution_json(const ExplainReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"factor", r.factor},
                    {"value", is_missing(r.value) ? nlohmann::json() : nlohmann::json(r.value)},
                    {"phi", r.phi},
                    {"direction", std::string(1, r.direction)}});
  }
  return {{"base_value", rep.attribution.base_value},
          {"margin", rep.attribution.model_output},
          {"probability", rep.attribution.probability},
          {"contributions", rows}};
}

inline std::string attribution_text(const ExplainReport& rep) {
  std::string out;
  out += "probability " + format_double(rep.attribution.probability) + " (base value " +
         format_double(rep.attribution.base_value) + ", margin " +
         format_double(rep.attribution.model_output) + ")\n";
  for (const auto& r : rep.rows) {
    out += "  ";
    out += r.direction;
    out += " " + r.factor + " = " + (is_missing(r.value) ? "missing" : format_double(r.value)) +
           "  phi " + format_double(r.phi) + "\n";
  }
  return out;
}

}  // namespace nextround
