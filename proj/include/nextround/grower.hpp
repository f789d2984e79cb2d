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
#include <cstdint>
#include <deque>
#include <numeric>
#include <vector>

#include "nextround/histogram.hpp"
#include "nextround/parallel.hpp"
#include "nextround/rng.hpp"
#include "nextround/tree.hpp"

namespace nextround {

// Gains this small are indistinguishable from accumulation noise; both the
// engine and the exhaustive-scan oracle in the tests reject them.
inline constexpr double kMinSplitGain = 1e-10;

struct SplitParams {
  double lambda_l2 = 1.0;
  double gamma_min_gain = 0.0;
};

// Second-order boosting criterion: per-row stats are (gradient, hessian).
struct GbdtCriterion {
  struct Acc {
    double a = 0, b = 0;
    size_t n = 0;
    void add(double g, double h) {
      a += g;
      b += h;
      ++n;
    }
    void merge(const Acc& o) {
      a += o.a;
      b += o.b;
      n += o.n;
    }
  };
  static double score(const Acc& s, const SplitParams& p) {
    return 0.5 * s.a * s.a / (s.b + p.lambda_l2);
  }
  static double leaf_value(const Acc& s, const SplitParams& p) { return -s.a / (s.b + p.lambda_l2); }
  static double cover(const Acc& s) { return s.b; }
};

// Weighted Gini criterion: per-row stats are (w*y, w*(1-y)).
// score(S) = -W * gini(S), so score(L)+score(R)-score(P) is the weighted
// impurity decrease.
struct GiniCriterion {
  struct Acc {
    double a = 0, b = 0;  // positive weight, negative weight
    size_t n = 0;
    void add(double wp, double wn) {
      a += wp;
      b += wn;
      ++n;
    }
    void merge(const Acc& o) {
      a += o.a;
      b += o.b;
      n += o.n;
    }
  };
  static double score(const Acc& s, const SplitParams&) {
    const double w = s.a + s.b;
    if (w <= 0) return 0;
    return (s.a * s.a + s.b * s.b) / w - w;
  }
  static double leaf_value(const Acc& s, const SplitParams&) {
    const double w = s.a + s.b;
    return w > 0 ? s.a / w : 0.5;
  }
  static double cover(const Acc& s) { return s.a + s.b; }
};

template <typename Crit>
struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  int bin = -1;  // threshold index within the feature's bins
  double threshold = 0;
  bool default_left = true;
  double gain = 0;
  typename Crit::Acc left;
  typename Crit::Acc right;
};

struct GrowParams {
  int max_depth = 6;
  int max_leaves = 0;  // 0 = unbounded; used by leaf-wise growth
  bool leaf_wise = false;
  SplitParams split;
  int features_per_split = 0;  // 0 = all features (forests sample sqrt(m))
  int threads = 1;
};

namespace detail {

// Exhaustive scan over one feature's bins, evaluating the missing bucket in
// both directions. Candidates are visited threshold-ascending with
// missing-left before missing-right; replacement requires strictly larger
// gain, which realizes the documented tie-break.
template <typename Crit>
SplitCandidate<Crit> scan_feature(const BinnedMatrix& bm, int feature,
                                  const std::vector<uint32_t>& rows, size_t begin, size_t end,
                                  const double* stat_a, const double* stat_b, double parent_score,
                                  const SplitParams& sp) {
  using Acc = typename Crit::Acc;
  const auto& fb = bm.features[static_cast<size_t>(feature)];
  SplitCandidate<Crit> best;
  if (fb.thresholds.empty()) return best;

  std::vector<Acc> bins(fb.n_bins());
  Acc miss;
  for (size_t i = begin; i < end; ++i) {
    const uint32_t r = rows[i];
    const uint16_t code = bm.code(r, static_cast<size_t>(feature));
    if (code == BinnedMatrix::kMissingCode)
      miss.add(stat_a[r], stat_b[r]);
    else
      bins[code].add(stat_a[r], stat_b[r]);
  }

  // suffix[b] = sum of bins b..end; prefix accumulates on the fly
  std::vector<Acc> suffix(bins.size() + 1);
  for (size_t b = bins.size(); b-- > 0;) {
    suffix[b] = suffix[b + 1];
    suffix[b].merge(bins[b]);
  }

  Acc prefix;
  const double gamma = sp.gamma_min_gain;
  for (size_t b = 0; b + 1 < bins.size(); ++b) {
    prefix.merge(bins[b]);
    for (int dir = 0; dir < 2; ++dir) {
      const bool missing_left = dir == 0;
      Acc left = prefix;
      Acc right = suffix[b + 1];
      if (missing_left)
        left.merge(miss);
      else
        right.merge(miss);
      if (left.n == 0 || right.n == 0) continue;
      const double gain = Crit::score(left, sp) + Crit::score(right, sp) - parent_score - gamma;
      if (gain > best.gain && gain > kMinSplitGain) {
        best.valid = true;
        best.feature = feature;
        best.bin = static_cast<int>(b);
        best.threshold = fb.thresholds[b];
        best.default_left = missing_left;
        best.gain = gain;
        best.left = left;
        best.right = right;
      }
    }
  }
  return best;
}

}  // namespace detail

// Grows one tree over the binned matrix. `rows` is permuted in place as nodes
// split; stat_a/stat_b are indexed by original row id. Histogram scans run in
// parallel across features; the result is independent of the thread count.
template <typename Crit>
class TreeGrower {
 public:
  TreeGrower(const BinnedMatrix& bm, const GrowParams& params, Rng* feature_rng = nullptr)
      : bm_(bm), params_(params), feature_rng_(feature_rng) {}

  Tree grow(std::vector<uint32_t>& rows, const double* stat_a, const double* stat_b) {
    rows_ = &rows;
    a_ = stat_a;
    b_ = stat_b;
    tree_ = Tree{};
    typename Crit::Acc root_acc = accumulate(0, rows.size());
    tree_.nodes.push_back(make_leaf(root_acc));
    if (params_.leaf_wise)
      grow_leaf_wise(root_acc);
    else
      grow_level_wise(root_acc);
    return std::move(tree_);
  }

  // Best split over a row set; exposed for the oracle tests.
  SplitCandidate<Crit> best_split(std::vector<uint32_t> rows, const double* stat_a,
                                  const double* stat_b) {
    rows_ = &rows;
    a_ = stat_a;
    b_ = stat_b;
    typename Crit::Acc parent = accumulate(0, rows.size());
    auto cand = find_best(0, rows.size(), parent);
    rows_ = nullptr;
    return cand;
  }

 private:
  struct Work {
    int node = 0;
    size_t begin = 0, end = 0;
    int depth = 0;
    typename Crit::Acc acc;
    SplitCandidate<Crit> cand;  // leaf-wise: precomputed candidate
  };

  typename Crit::Acc accumulate(size_t begin, size_t end) const {
    typename Crit::Acc acc;
    const auto& rows = *rows_;
    for (size_t i = begin; i < end; ++i) acc.add(a_[rows[i]], b_[rows[i]]);
    return acc;
  }

  TreeNode make_leaf(const typename Crit::Acc& acc) const {
    TreeNode n;
    n.value = Crit::leaf_value(acc, params_.split);
    n.cover = Crit::cover(acc);
    return n;
  }

  std::vector<int> pick_features() {
    const int m = static_cast<int>(bm_.n_features);
    std::vector<int> feats(static_cast<size_t>(m));
    std::iota(feats.begin(), feats.end(), 0);
    const int k = params_.features_per_split;
    if (feature_rng_ == nullptr || k <= 0 || k >= m) return feats;
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(feature_rng_->below(static_cast<uint64_t>(m - i)));
      std::swap(feats[static_cast<size_t>(i)], feats[static_cast<size_t>(j)]);
    }
    feats.resize(static_cast<size_t>(k));
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  SplitCandidate<Crit> find_best(size_t begin, size_t end, const typename Crit::Acc& parent) {
    SplitCandidate<Crit> best;
    if (end - begin < 2) return best;
    const std::vector<int> feats = pick_features();
    const double parent_score = Crit::score(parent, params_.split);
    std::vector<SplitCandidate<Crit>> per_feature(feats.size());
    parallel_for(feats.size(), params_.threads, [&](size_t lo, size_t hi) {
      for (size_t f = lo; f < hi; ++f)
        per_feature[f] = detail::scan_feature<Crit>(bm_, feats[f], *rows_, begin, end, a_, b_,
                                                    parent_score, params_.split);
    });
    for (const auto& cand : per_feature) {  // ascending feature order
      if (cand.valid && cand.gain > best.gain) best = cand;
    }
    return best;
  }

  // Applies a candidate: partitions the node's rows and appends two leaves.
  std::pair<Work, Work> apply_split(const Work& w) {
    const auto& cand = w.cand;
    auto& rows = *rows_;
    const int feature = cand.feature;
    const uint16_t split_bin = static_cast<uint16_t>(cand.bin);
    auto goes_left = [&](uint32_t r) {
      const uint16_t code = bm_.code(r, static_cast<size_t>(feature));
      if (code == BinnedMatrix::kMissingCode) return cand.default_left;
      return code <= split_bin;
    };
    auto mid_it = std::stable_partition(rows.begin() + static_cast<long>(w.begin),
                                        rows.begin() + static_cast<long>(w.end), goes_left);
    const size_t mid = static_cast<size_t>(mid_it - rows.begin());

    TreeNode& node = tree_.nodes[static_cast<size_t>(w.node)];
    node.feature = feature;
    node.threshold = cand.threshold;
    node.default_left = cand.default_left;
    node.gain = cand.gain;
    node.value = 0;
    node.split_bin = cand.bin;
    node.left = static_cast<int>(tree_.nodes.size());
    node.right = node.left + 1;
    tree_.nodes.push_back(make_leaf(cand.left));
    tree_.nodes.push_back(make_leaf(cand.right));

    Work left{tree_.nodes[static_cast<size_t>(w.node)].left, w.begin, mid, w.depth + 1, cand.left, {}};
    Work right{tree_.nodes[static_cast<size_t>(w.node)].right, mid, w.end, w.depth + 1, cand.right, {}};
    return {left, right};
  }

  void grow_level_wise(const typename Crit::Acc& root_acc) {
    std::deque<Work> queue;
    queue.push_back(Work{0, 0, rows_->size(), 0, root_acc, {}});
    while (!queue.empty()) {
      Work w = queue.front();
      queue.pop_front();
      if (w.depth >= params_.max_depth) continue;
      w.cand = find_best(w.begin, w.end, w.acc);
      if (!w.cand.valid) continue;
      auto [left, right] = apply_split(w);
      queue.push_back(left);
      queue.push_back(right);
    }
  }

  void grow_leaf_wise(const typename Crit::Acc& root_acc) {
    std::vector<Work> frontier;
    Work root{0, 0, rows_->size(), 0, root_acc, {}};
    root.cand = find_best(root.begin, root.end, root.acc);
    frontier.push_back(std::move(root));
    while (params_.max_leaves == 0 ||
           frontier.size() < static_cast<size_t>(params_.max_leaves)) {
      // best frontier leaf by gain; ties go to the older node id
      size_t pick = frontier.size();
      double best_gain = 0;
      for (size_t i = 0; i < frontier.size(); ++i) {
        if (!frontier[i].cand.valid) continue;
        if (frontier[i].cand.gain > best_gain ||
            (pick < frontier.size() && frontier[i].cand.gain == best_gain &&
             frontier[i].node < frontier[pick].node)) {
          best_gain = frontier[i].cand.gain;
          pick = i;
        }
      }
      if (pick >= frontier.size()) break;
      Work w = frontier[pick];
      frontier.erase(frontier.begin() + static_cast<long>(pick));
      auto [left, right] = apply_split(w);
      if (left.depth < params_.max_depth) left.cand = find_best(left.begin, left.end, left.acc);
      if (right.depth < params_.max_depth) right.cand = find_best(right.begin, right.end, right.acc);
      frontier.push_back(std::move(left));
      frontier.push_back(std::move(right));
    }
  }

  const BinnedMatrix& bm_;
  GrowParams params_;
  Rng* feature_rng_;
  std::vector<uint32_t>* rows_ = nullptr;
  const double* a_ = nullptr;
  const double* b_ = nullptr;
  Tree tree_;
};

// Routes a binned row through a freshly grown tree (split_bin is only set on
// trees that have not been through serialization).
inline int route_binned(const Tree& tree, const BinnedMatrix& bm, size_t row) {
  int idx = 0;
  while (!tree.nodes[static_cast<size_t>(idx)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    const uint16_t code = bm.code(row, static_cast<size_t>(n.feature));
    if (code == BinnedMatrix::kMissingCode)
      idx = n.default_left ? n.left : n.right;
    else
      idx = code <= static_cast<uint16_t>(n.split_bin) ? n.left : n.right;
  }
  return idx;
}

}  // namespace nextround
