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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "nextround/cart.hpp"
#include "nextround/gbdt.hpp"

namespace nextround {
namespace {

Dataset make_dataset(size_t n_features) {
  Dataset d;
  for (size_t j = 0; j < n_features; ++j) d.feature_names.push_back("f" + std::to_string(j));
  return d;
}

TEST(Histogram, QuantileEdgesOnUniformData) {
  std::vector<double> values(1000);
  for (int i = 0; i < 1000; ++i) values[static_cast<size_t>(i)] = i + 1;  // 1..1000
  FeatureBins fb = quantile_bins(values, 4);
  ASSERT_EQ(fb.thresholds.size(), 3u);
  EXPECT_NEAR(fb.thresholds[0], 250.0, 1.0);
  EXPECT_NEAR(fb.thresholds[1], 500.0, 1.0);
  EXPECT_NEAR(fb.thresholds[2], 750.0, 1.0);
}

TEST(Histogram, ConstantColumnHasNoThresholds) {
  FeatureBins fb = quantile_bins(std::vector<double>(50, 3.14), 16);
  EXPECT_TRUE(fb.thresholds.empty());
}

TEST(Histogram, MissingBucketHoldsMissingRows) {
  Dataset d = make_dataset(1);
  Rng rng(1);
  size_t missing = 0;
  for (int i = 0; i < 200; ++i) {
    const bool miss = i % 5 < 2;  // 40%
    missing += miss;
    d.add_row(std::array{miss ? kMissing : rng.uniform()}, 0);
  }
  BinnedMatrix bm = build_binned(d, 16);
  size_t found = 0;
  for (size_t i = 0; i < d.n_rows(); ++i)
    found += bm.code(i, 0) == BinnedMatrix::kMissingCode;
  EXPECT_EQ(found, missing);
  EXPECT_EQ(found, 80u);
}

TEST(Histogram, ExactModeWhenFewDistinctValues) {
  std::vector<double> values{5, 1, 3, 3, 1, 5, 7};
  FeatureBins fb = quantile_bins(values, 255);
  EXPECT_EQ(fb.thresholds, (std::vector<double>{1, 3, 5}));  // all distinct but the max
}

TEST(SplitGain, HandComputedValues) {
  // two samples y={0,1} from base probability 0.5: g={+0.5,-0.5}, h={0.25,0.25}
  EXPECT_NEAR(split_gain(0.5, 0.25, -0.5, 0.25, 0.0, 0.0), 1.0, 1e-12);
  // symmetric split adds nothing beyond -gamma (lambda 0)
  EXPECT_DOUBLE_EQ(split_gain(1.0, 2.0, 1.0, 2.0, 0.0, 0.25), -0.25);
  // large gamma rejects
  EXPECT_LT(split_gain(0.5, 0.25, -0.5, 0.25, 0.0, 5.0), 0.0);
}

// ---------------------------------------------------------------------------
// Exhaustive exact-search oracle for best_split. Independent of the engine:
// it enumerates every (feature, distinct threshold, missing direction)
// partition directly on the raw matrix.
struct OracleSplit {
  bool valid = false;
  int feature = -1;
  double threshold = 0;
  bool default_left = true;
  double gain = 0;
};

// Gain of one fully specified split, from raw data.
double oracle_eval_split(const Dataset& d, const std::vector<double>& g,
                         const std::vector<double>& h, double lambda, double gamma, int feature,
                         double threshold, bool missing_left) {
  auto score = [&](double gs, double hs) { return 0.5 * gs * gs / (hs + lambda); };
  double gl = 0, hl = 0, gr = 0, hr = 0;
  for (size_t i = 0; i < d.n_rows(); ++i) {
    const double v = d.at(i, static_cast<size_t>(feature));
    const bool left = is_missing(v) ? missing_left : v <= threshold;
    if (left) {
      gl += g[i];
      hl += h[i];
    } else {
      gr += g[i];
      hr += h[i];
    }
  }
  return score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr) - gamma;
}

OracleSplit oracle_best_split(const Dataset& d, const std::vector<double>& g,
                              const std::vector<double>& h, double lambda, double gamma) {
  OracleSplit best;
  auto score = [&](double gs, double hs) { return 0.5 * gs * gs / (hs + lambda); };
  for (size_t j = 0; j < d.n_features(); ++j) {
    std::set<double> distinct;
    for (size_t i = 0; i < d.n_rows(); ++i)
      if (!is_missing(d.at(i, j))) distinct.insert(d.at(i, j));
    if (distinct.size() < 2) continue;
    std::vector<double> thresholds(distinct.begin(), std::prev(distinct.end()));
    for (double th : thresholds) {
      for (int dir = 0; dir < 2; ++dir) {
        const bool missing_left = dir == 0;
        double gl = 0, hl = 0, gr = 0, hr = 0;
        size_t nl = 0, nr = 0;
        for (size_t i = 0; i < d.n_rows(); ++i) {
          const double v = d.at(i, j);
          const bool left = is_missing(v) ? missing_left : v <= th;
          if (left) {
            gl += g[i];
            hl += h[i];
            ++nl;
          } else {
            gr += g[i];
            hr += h[i];
            ++nr;
          }
        }
        if (nl == 0 || nr == 0) continue;
        const double gain = score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr) - gamma;
        if (gain > best.gain && gain > kMinSplitGain) {
          best.valid = true;
          best.feature = static_cast<int>(j);
          best.threshold = th;
          best.default_left = missing_left;
          best.gain = gain;
        }
      }
    }
  }
  return best;
}

// Gradients and hessians are drawn from a dyadic grid (multiples of 1/8) so
// every partial sum is exact in double precision: identical partitions then
// produce bit-identical gains in the engine and the oracle, and the
// documented tie-break has to match exactly. Zero tolerance, zero mismatches.
TEST(BestSplit, MatchesExhaustiveOracleOnRandomFixtures) {
  Rng rng(20240917);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 2 + rng.below(199);
    const size_t m = 1 + rng.below(5);
    Dataset d = make_dataset(m);
    std::vector<double> g(n), h(n);
    std::vector<double> row(m);
    const double missing_rate = rng.uniform() * 0.5;
    const int distinct_vals = 2 + static_cast<int>(rng.below(12));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < m; ++j) {
        row[j] = rng.bernoulli(missing_rate)
                     ? kMissing
                     : std::round(rng.uniform() * distinct_vals) / 3.0;
      }
      d.add_row(row, 0);
      g[i] = static_cast<double>(static_cast<int64_t>(rng.below(33)) - 16) / 8.0;
      h[i] = static_cast<double>(1 + rng.below(16)) / 8.0;  // positive hessians
    }
    const double lambda = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double gamma = rng.bernoulli(0.3) ? rng.uniform() * 0.2 : 0.0;

    BinnedMatrix bm = build_binned(d, 255);  // n_bins >= distinct values: exact
    GrowParams gp;
    gp.split.lambda_l2 = lambda;
    gp.split.gamma_min_gain = gamma;
    TreeGrower<GbdtCriterion> grower(bm, gp);
    std::vector<uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    auto got = grower.best_split(rows, g.data(), h.data());
    auto want = oracle_best_split(d, g, h, lambda, gamma);

    ASSERT_EQ(got.valid, want.valid) << "trial " << trial;
    if (want.valid) {
      ASSERT_EQ(got.feature, want.feature) << "trial " << trial;
      ASSERT_DOUBLE_EQ(got.threshold, want.threshold) << "trial " << trial;
      ASSERT_EQ(got.default_left, want.default_left) << "trial " << trial;
      ASSERT_DOUBLE_EQ(got.gain, want.gain) << "trial " << trial;
      // the oracle re-evaluates the engine's split descriptor to the same gain
      ASSERT_DOUBLE_EQ(oracle_eval_split(d, g, h, lambda, gamma, got.feature, got.threshold,
                                         got.default_left),
                       got.gain)
          << "trial " << trial;
      ++checked;
    }
  }
  EXPECT_GT(checked, 150);  // most random fixtures should have a usable split
}

TEST(BestSplit, MissingRoutedTowardPositiveLeaningChild) {
  // one feature; present values separate weakly, missing rows are all
  // positive: the chosen default direction must route them to the child
  // whose leaf value pushes positive (negative gradients).
  Dataset d = make_dataset(1);
  std::vector<double> g, h;
  for (int i = 0; i < 30; ++i) {
    d.add_row(std::array{0.0}, 0);
    g.push_back(0.5);  // negative class at p=0.5
    h.push_back(0.25);
  }
  for (int i = 0; i < 30; ++i) {
    d.add_row(std::array{1.0}, 1);
    g.push_back(-0.5);
    h.push_back(0.25);
  }
  for (int i = 0; i < 20; ++i) {
    d.add_row(std::array{kMissing}, 1);
    g.push_back(-0.5);
    h.push_back(0.25);
  }
  BinnedMatrix bm = build_binned(d, 255);
  GrowParams gp;
  gp.split.lambda_l2 = 0.0;
  TreeGrower<GbdtCriterion> grower(bm, gp);
  std::vector<uint32_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), 0u);
  auto cand = grower.best_split(rows, g.data(), h.data());
  ASSERT_TRUE(cand.valid);
  EXPECT_EQ(cand.feature, 0);
  EXPECT_FALSE(cand.default_left);  // positives live on the right of 0 <= 0.0
}

TEST(BestSplit, PureNodeHasNoSplit) {
  Dataset d = make_dataset(2);
  std::vector<double> g, h;
  Rng rng(6);
  for (int i = 0; i < 40; ++i) {
    d.add_row(std::array{rng.uniform(), rng.uniform()}, 1);
    g.push_back(-1e-9);  // fully fit: gradients ~ 0
    h.push_back(1e-12);
  }
  BinnedMatrix bm = build_binned(d, 255);
  TreeGrower<GbdtCriterion> grower(bm, GrowParams{});
  std::vector<uint32_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), 0u);
  EXPECT_FALSE(grower.best_split(rows, g.data(), h.data()).valid);
}

Dataset separable_fixture(size_t n, uint64_t seed) {
  Dataset d = make_dataset(2);
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(rng.below(2));
    const double x0 = rng.normal(y ? 2.0 : -2.0, 0.5);
    const double x1 = rng.uniform();
    d.add_row(std::array{x0, x1}, y);
  }
  return d;
}

TEST(TrainGbdt, LossDecreasesOnSeparableData) {
  Dataset d = separable_fixture(400, 11);
  BoostParams p;
  p.n_estimators = 20;
  p.max_depth = 3;
  GbdtModel m = train_gbdt(d, p);
  ASSERT_GE(m.train_loss.size(), 2u);
  for (size_t r = 1; r < m.train_loss.size(); ++r)
    EXPECT_LE(m.train_loss[r], m.train_loss[r - 1] + 1e-12) << "round " << r;
  // strictly decreasing overall
  EXPECT_LT(m.train_loss.back(), m.train_loss.front());
}

TEST(TrainGbdt, AllOneClassGivesBaseScoreOnly) {
  Dataset d = make_dataset(1);
  for (int i = 0; i < 50; ++i) d.add_row(std::array{static_cast<double>(i)}, 1);
  BoostParams p;
  p.n_estimators = 10;
  GbdtModel m = train_gbdt(d, p);
  EXPECT_TRUE(m.trees.empty());
  EXPECT_GT(m.predict(std::array{3.0}), 0.999);
}

TEST(TrainGbdt, EmptyEnsemblePredictsBaseScore) {
  GbdtModel m;
  m.base_score = log_odds(0.25);
  EXPECT_NEAR(m.predict(std::array{1.0, 2.0}), 0.25, 1e-12);
}

TEST(TrainGbdt, AllMissingVectorYieldsValidProbability) {
  Dataset d = separable_fixture(300, 12);
  // knock some holes so default directions get trained
  Rng rng(13);
  for (size_t i = 0; i < d.n_rows(); ++i)
    if (rng.bernoulli(0.2)) d.values[i * 2] = kMissing;
  BoostParams p;
  p.n_estimators = 10;
  p.max_depth = 3;
  GbdtModel m = train_gbdt(d, p);
  const double prob = m.predict(std::array{kMissing, kMissing});
  EXPECT_GE(prob, 0.0);
  EXPECT_LE(prob, 1.0);
  EXPECT_TRUE(std::isfinite(prob));
}

TEST(TrainGbdt, ArityMismatchThrows) {
  Dataset d = separable_fixture(100, 14);
  BoostParams p;
  p.n_estimators = 2;
  GbdtModel m = train_gbdt(d, p);
  EXPECT_THROW(m.predict(std::array{1.0}), std::invalid_argument);
}

TEST(TrainGbdt, CoverConservation) {
  Dataset d = separable_fixture(500, 15);
  Rng rng(16);
  for (size_t i = 0; i < d.n_rows(); ++i)
    if (rng.bernoulli(0.25)) d.values[i * 2] = kMissing;
  BoostParams p;
  p.n_estimators = 8;
  p.max_depth = 4;
  p.class_weighting = true;
  GbdtModel m = train_gbdt(d, p);
  ASSERT_FALSE(m.trees.empty());
  for (const auto& tree : m.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const double child_sum = tree.nodes[static_cast<size_t>(node.left)].cover +
                               tree.nodes[static_cast<size_t>(node.right)].cover;
      EXPECT_NEAR(node.cover, child_sum, 1e-9 * std::max(1.0, node.cover));
      EXPECT_GE(node.gain, 0.0);
    }
  }
}

TEST(TrainGbdt, DeterministicAcrossThreadCounts) {
  Dataset d = separable_fixture(600, 17);
  BoostParams p;
  p.n_estimators = 12;
  p.max_depth = 4;
  p.seed = 5;
  p.threads = 1;
  GbdtModel a = train_gbdt(d, p);
  p.threads = 4;
  GbdtModel b = train_gbdt(d, p);
  const std::string ja = gbdt_to_json(a).dump();
  const std::string jb = gbdt_to_json(b).dump();
  EXPECT_EQ(ja, jb);
}

TEST(TrainGbdt, GossKeepsDeterminismAndLearns) {
  Dataset d = separable_fixture(800, 18);
  BoostParams p;
  p.n_estimators = 15;
  p.max_depth = 3;
  p.goss = GossConfig{0.2, 0.2};
  p.seed = 21;
  GbdtModel a = train_gbdt(d, p);
  GbdtModel b = train_gbdt(d, p);
  EXPECT_EQ(gbdt_to_json(a).dump(), gbdt_to_json(b).dump());
  // still learns the separable structure
  EXPECT_GT(a.predict(std::array{2.5, 0.5}), 0.7);
  EXPECT_LT(a.predict(std::array{-2.5, 0.5}), 0.3);
}

TEST(TrainGbdt, SerializationRoundTripIsExact) {
  Dataset d = separable_fixture(300, 19);
  BoostParams p;
  p.n_estimators = 6;
  p.max_depth = 3;
  p.goss = GossConfig{0.3, 0.1};
  GbdtModel m = train_gbdt(d, p);
  const nlohmann::json j = gbdt_to_json(m);
  GbdtModel back = gbdt_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(gbdt_to_json(back).dump(), j.dump());
  Rng rng(20);
  for (int i = 0; i < 50; ++i) {
    std::array<double, 2> x{rng.normal(0, 2), rng.uniform()};
    if (rng.bernoulli(0.2)) x[0] = kMissing;
    const double pa = m.predict(x);
    const double pb = back.predict(x);
    EXPECT_EQ(pa, pb);  // bit-identical
  }
}

TEST(TrainGbdt, LeafWiseNotWorseThanLevelWiseOnFixture) {
  Dataset d = separable_fixture(500, 22);
  BoostParams level;
  level.n_estimators = 10;
  level.max_depth = 4;
  level.growth = GrowthPolicy::LevelWise;
  BoostParams leaf = level;
  leaf.growth = GrowthPolicy::LeafWise;
  leaf.max_leaves = 1 << 4;  // 2^max_depth, depth otherwise unconstrained
  leaf.max_depth = 64;
  GbdtModel ml = train_gbdt(d, level);
  GbdtModel mf = train_gbdt(d, leaf);
  EXPECT_LE(mf.train_loss.back(), ml.train_loss.back() + 1e-9);
}

TEST(TrainGbdt, PresetsCarryPublishedShapes) {
  EXPECT_EQ(xgb_preset().n_estimators, 180);
  EXPECT_EQ(xgb_preset().max_depth, 11);
  EXPECT_EQ(xgb_preset().growth, GrowthPolicy::LevelWise);
  EXPECT_EQ(lgbm_preset().n_estimators, 355);
  EXPECT_EQ(lgbm_preset().max_depth, 8);
  EXPECT_EQ(lgbm_preset().growth, GrowthPolicy::LeafWise);
}

TEST(TrainCart, SingleThresholdData) {
  Dataset d = make_dataset(1);
  for (int i = 0; i < 20; ++i) d.add_row(std::array{static_cast<double>(i)}, i >= 10);
  CartParams p;
  p.max_depth = 1;
  CartModel m = train_cart(d, p);
  ASSERT_EQ(m.tree.nodes.size(), 3u);
  EXPECT_DOUBLE_EQ(m.tree.nodes[0].threshold, 9.0);
  for (int i = 0; i < 20; ++i) {
    const double pred = m.predict(std::array{static_cast<double>(i)});
    EXPECT_EQ(pred >= 0.5, i >= 10);
    EXPECT_TRUE(pred == 0.0 || pred == 1.0);
  }
}

TEST(TrainCart, UnitWeightsEqualUnweighted) {
  Dataset d = separable_fixture(200, 23);
  CartParams p;
  p.max_depth = 4;
  CartModel unweighted = train_cart(d, p);
  Dataset dw = d;
  dw.weights.assign(dw.n_rows(), 1.0);
  CartModel weighted = train_cart(dw, p);
  EXPECT_EQ(cart_to_json(unweighted).dump(), cart_to_json(weighted).dump());
}

TEST(TrainCart, ClassWeightingMovesThreshold) {
  // minority positives sit in the tail of a single feature; with class
  // weighting the split must move toward the majority mass so that more of
  // the positive tail is captured.
  Dataset d = make_dataset(1);
  Rng rng(24);
  for (int i = 0; i < 300; ++i) d.add_row(std::array{rng.normal(0, 1)}, 0);
  for (int i = 0; i < 30; ++i) d.add_row(std::array{rng.normal(1.5, 1)}, 1);
  CartParams p;
  p.max_depth = 1;
  CartModel plain = train_cart(d, p);
  p.class_weighting = true;
  CartModel weighted = train_cart(d, p);
  ASSERT_FALSE(plain.tree.nodes[0].is_leaf());
  ASSERT_FALSE(weighted.tree.nodes[0].is_leaf());
  EXPECT_LT(weighted.tree.nodes[0].threshold, plain.tree.nodes[0].threshold);
}

TEST(TrainForest, DegenerateConfigEqualsCart) {
  Dataset d = separable_fixture(200, 25);
  CartParams p;
  p.max_depth = 4;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.feature_subsampling = false;
  ForestModel f = train_forest(d, p);
  CartModel c = train_cart(d, p);
  ASSERT_EQ(f.trees.size(), 1u);
  EXPECT_EQ(tree_to_json(f.trees[0]).dump(), tree_to_json(c.tree).dump());
}

TEST(TrainForest, SeedDeterminismAndDefaults) {
  EXPECT_EQ(forest_preset().n_estimators, 133);
  EXPECT_EQ(forest_preset().max_depth, 63);

  Dataset d = separable_fixture(200, 26);
  CartParams p;
  p.max_depth = 6;
  p.n_estimators = 7;
  p.seed = 31;
  ForestModel a = train_forest(d, p);
  ForestModel b = train_forest(d, p);
  EXPECT_EQ(forest_to_json(a).dump(), forest_to_json(b).dump());
  p.seed = 32;
  ForestModel c = train_forest(d, p);
  EXPECT_NE(forest_to_json(a).dump(), forest_to_json(c).dump());

  // averaged probabilities stay in range and separate the classes
  EXPECT_GT(a.predict(std::array{2.5, 0.5}), 0.6);
  EXPECT_LT(a.predict(std::array{-2.5, 0.5}), 0.4);
}

}  // namespace
}  // namespace nextround
