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

#include <span>
#include <stdexcept>
#include <vector>

#include "nextround/dataset.hpp"

#include <nlohmann/json.hpp>

namespace nextround {

// Split semantics: x <= threshold goes left; missing goes to the learned
// default child. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double gain = 0.0;   // split gain; 0 for leaves
  double value = 0.0;  // leaf output; 0 for internal nodes
  double cover = 0.0;  // hessian or weight mass routed through the node

  bool is_leaf() const { return feature < 0; }

  // Present during training only: bin index of the threshold.
  int split_bin = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  bool empty() const { return nodes.empty(); }

  int leaf_index(std::span<const double> x) const {
    int idx = 0;
    while (!nodes[static_cast<size_t>(idx)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<size_t>(idx)];
      const double v = x[static_cast<size_t>(n.feature)];
      if (is_missing(v))
        idx = n.default_left ? n.left : n.right;
      else
        idx = v <= n.threshold ? n.left : n.right;
    }
    return idx;
  }

  double predict(std::span<const double> x) const {
    return nodes[static_cast<size_t>(leaf_index(x))].value;
  }

  size_t leaf_count() const {
    size_t k = 0;
    for (const auto& n : nodes) k += n.is_leaf();
    return k;
  }

  int max_feature() const {
    int mf = -1;
    for (const auto& n : nodes)
      if (n.feature > mf) mf = n.feature;
    return mf;
  }
};

inline nlohmann::json tree_to_json(const Tree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}, {"cover", n.cover}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"default_left", n.default_left},
                       {"left", n.left},
                       {"right", n.right},
                       {"gain", n.gain},
                       {"cover", n.cover}});
    }
  }
  return {{"nodes", nodes}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree t;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    if (jn.contains("leaf")) {
      n.value = jn.at("leaf").get<double>();
      n.cover = jn.at("cover").get<double>();
    } else {
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.default_left = jn.at("default_left").get<bool>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      n.gain = jn.at("gain").get<double>();
      n.cover = jn.at("cover").get<double>();
    }
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) throw std::invalid_argument("tree with no nodes");
  return t;
}

}  // namespace nextround
