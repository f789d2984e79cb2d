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
#include <stdexcept>
#include <vector>

#include "nextround/dataset.hpp"
#include "nextround/parallel.hpp"

namespace nextround {

// Candidate thresholds for one feature, ascending. bin(x) is the index of the
// first threshold >= x (so a split at thresholds[b] sends bins 0..b left).
// Missing values never enter a bin; they carry a sentinel code and live in a
// per-node missing bucket during split finding.
struct FeatureBins {
  std::vector<double> thresholds;

  size_t n_bins() const { return thresholds.size() + 1; }

  uint16_t bin_of(double v) const {
    auto it = std::lower_bound(thresholds.begin(), thresholds.end(), v);
    return static_cast<uint16_t>(it - thresholds.begin());
  }
};

struct BinnedMatrix {
  static constexpr uint16_t kMissingCode = 0xFFFF;

  size_t n_rows = 0;
  size_t n_features = 0;
  std::vector<FeatureBins> features;
  std::vector<uint16_t> codes;  // row-major, n_rows * n_features

  uint16_t code(size_t row, size_t feature) const { return codes[row * n_features + feature]; }
  const uint16_t* row(size_t r) const { return codes.data() + r * n_features; }
};

// Quantile bin edges over present values. When a feature has at most n_bins
// distinct values every distinct value becomes its own bin, which makes
// histogram split finding equal to an exact exhaustive scan.
inline FeatureBins quantile_bins(std::vector<double> present, size_t n_bins) {
  FeatureBins fb;
  if (n_bins < 2) throw std::invalid_argument("n_bins must be >= 2");
  if (present.empty()) return fb;
  std::sort(present.begin(), present.end());
  std::vector<double> distinct(present);
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= 1) return fb;  // constant column: no candidate thresholds

  if (distinct.size() <= n_bins) {
    fb.thresholds.assign(distinct.begin(), distinct.end() - 1);  // all but the max
    return fb;
  }
  const size_t m = present.size();
  for (size_t i = 1; i < n_bins; ++i) {
    size_t pos = i * m / n_bins;
    fb.thresholds.push_back(present[pos > 0 ? pos - 1 : 0]);
  }
  std::sort(fb.thresholds.begin(), fb.thresholds.end());
  fb.thresholds.erase(std::unique(fb.thresholds.begin(), fb.thresholds.end()),
                      fb.thresholds.end());
  while (!fb.thresholds.empty() && fb.thresholds.back() >= distinct.back())
    fb.thresholds.pop_back();  // a threshold at the max splits nothing off
  return fb;
}

inline BinnedMatrix build_binned(const Dataset& d, size_t n_bins, int threads = 1) {
  BinnedMatrix bm;
  bm.n_rows = d.n_rows();
  bm.n_features = d.n_features();
  bm.features.resize(bm.n_features);
  parallel_for(bm.n_features, threads, [&](size_t begin, size_t end) {
    std::vector<double> present;
    for (size_t j = begin; j < end; ++j) {
      present.clear();
      for (size_t i = 0; i < bm.n_rows; ++i) {
        double v = d.at(i, j);
        if (!is_missing(v)) present.push_back(v);
      }
      bm.features[j] = quantile_bins(present, n_bins);
    }
  });
  bm.codes.resize(bm.n_rows * bm.n_features);
  parallel_for(bm.n_rows, threads, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      for (size_t j = 0; j < bm.n_features; ++j) {
        double v = d.at(i, j);
        bm.codes[i * bm.n_features + j] =
            is_missing(v) ? BinnedMatrix::kMissingCode : bm.features[j].bin_of(v);
      }
    }
  });
  return bm;
}

}  // namespace nextround
