// Copyright 2026 The viewflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "viewflow/metrics.hpp"

// Brute-force metric references, written without the library's rank logic.
namespace viewflow::testing::oracle {

inline double auc_pairs(const std::vector<RankedItem>& v) {
  double wins = 0;
  std::size_t pairs = 0;
  for (const auto& p : v) {
    if (p.label != 1) continue;
    for (const auto& n : v) {
      if (n.label == 1) continue;
      ++pairs;
      wins += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
    }
  }
  return wins / static_cast<double>(pairs);
}

inline std::vector<int> labels_in_rank_order(const std::vector<RankedItem>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v[a].score != v[b].score ? v[a].score > v[b].score : a < b;
  });
  std::vector<int> out;
  for (auto i : idx) out.push_back(v[i].label);
  return out;
}

inline double mrr_sorted(const std::vector<RankedItem>& v) {
  auto y = labels_in_rank_order(v);
  double s = 0;
  int n = 0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (y[r]) {
      s += 1.0 / static_cast<double>(r + 1);
      ++n;
    }
  }
  return s / n;
}

inline double ndcg_sorted(const std::vector<RankedItem>& v, std::size_t k) {
  auto y = labels_in_rank_order(v);
  double dcg = 0;
  for (std::size_t r = 0; r < std::min(k, y.size()); ++r) {
    if (y[r]) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  std::sort(y.rbegin(), y.rend());
  double ideal = 0;
  for (std::size_t r = 0; r < std::min(k, y.size()); ++r) {
    if (y[r]) ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / ideal;
}

inline std::vector<RankedImpression> random_impressions(std::size_t count, std::uint64_t seed,
                                                 std::size_t max_items = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(2, max_items);
  std::uniform_int_distribution<int> coarse(0, 5);  // forces ties
  std::bernoulli_distribution label(0.3);
  std::vector<RankedImpression> out;
  for (std::size_t i = 0; i < count; ++i) {
    RankedImpression imp;
    imp.impression_id = "i" + std::to_string(i);
    const std::size_t n = len(rng);
    for (std::size_t c = 0; c < n; ++c) {
      imp.items.push_back({coarse(rng) / 5.0, label(rng) ? 1 : 0});
    }
    out.push_back(std::move(imp));
  }
  return out;
}

}  // namespace viewflow::testing::oracle
