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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "viewflow/error.hpp"
#include "metric_oracles.hpp"
#include "viewflow/metrics.hpp"

namespace viewflow {
namespace {

using namespace testing::oracle;

std::vector<RankedItem> items(std::vector<double> scores, std::vector<int> labels) {
  std::vector<RankedItem> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({scores[i], labels[i]});
  return out;
}

// Scores such that positives land at the given 1-based ranks.
std::vector<RankedItem> positives_at(std::size_t n, std::vector<std::size_t> ranks) {
  std::vector<RankedItem> out;
  for (std::size_t r = 1; r <= n; ++r) {
    int y = std::find(ranks.begin(), ranks.end(), r) != ranks.end();
    out.push_back({1.0 - 0.01 * static_cast<double>(r), y});
  }
  return out;
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc(items({0.9, 0.1}, {1, 0})), 1.0);
  EXPECT_EQ(auc(items({0.9, 0.8, 0.1}, {0, 1, 0})), 0.5);
  EXPECT_EQ(auc(items({0.3, 0.3}, {1, 0})), 0.5);
  EXPECT_EQ(auc(items({0.1, 0.9}, {1, 0})), 0.0);
  EXPECT_FALSE(auc(items({0.1, 0.9}, {1, 1})));
  EXPECT_FALSE(auc(items({0.1, 0.9}, {0, 0})));
}

TEST(Mrr, Examples) {
  EXPECT_EQ(mrr(positives_at(5, {2})), 0.5);
  EXPECT_EQ(mrr(positives_at(5, {1})), 1.0);
  EXPECT_EQ(mrr(positives_at(5, {1, 4})), 0.625);
  EXPECT_FALSE(mrr(positives_at(3, {})));
}

TEST(Mrr, TiesBreakByInputOrder) {
  // Equal scores: the earlier item ranks first.
  EXPECT_EQ(mrr(items({0.5, 0.5}, {0, 1})), 0.5);
  EXPECT_EQ(mrr(items({0.5, 0.5}, {1, 0})), 1.0);
  EXPECT_EQ(rank_positions(items({0.2, 0.7, 0.2}, {0, 0, 0})),
            (std::vector<std::size_t>{2, 1, 3}));
}

TEST(Ndcg, Examples) {
  EXPECT_NEAR(*ndcg_at(positives_at(6, {2}), 5), 0.6309297536, 1e-10);
  EXPECT_EQ(ndcg_at(positives_at(6, {1}), 5), 1.0);
  EXPECT_EQ(ndcg_at(positives_at(6, {6}), 5), 0.0);
  EXPECT_GT(*ndcg_at(positives_at(6, {6}), 10), 0.0);
  EXPECT_FALSE(ndcg_at(positives_at(3, {}), 5));
}

TEST(Oracle, MetricsEqualBruteForceExactly) {
  for (const auto& imp : random_impressions(2000, 3)) {
    const auto& v = imp.items;
    if (imp.positives() == 0) {
      EXPECT_FALSE(mrr(v));
      continue;
    }
    EXPECT_EQ(*mrr(v), mrr_sorted(v));
    EXPECT_EQ(*ndcg_at(v, 5), ndcg_sorted(v, 5));
    EXPECT_EQ(*ndcg_at(v, 10), ndcg_sorted(v, 10));
    if (imp.negatives() == 0) {
      EXPECT_FALSE(auc(v));
      continue;
    }
    EXPECT_EQ(*auc(v), auc_pairs(v));
  }
}

TEST(Properties, MonotoneTransformInvariance) {
  for (auto imp : random_impressions(500, 5)) {
    if (imp.positives() == 0 || imp.negatives() == 0) continue;
    auto t = imp.items;
    for (auto& it : t) it.score = std::exp(3.0 * it.score) - 7.0;
    EXPECT_EQ(auc(imp.items), auc(t));
    EXPECT_EQ(mrr(imp.items), mrr(t));
    EXPECT_EQ(ndcg_at(imp.items, 5), ndcg_at(t, 5));
  }
}

TEST(Properties, RangeIsUnitInterval) {
  for (const auto& imp : random_impressions(500, 9, 20)) {
    for (auto m : {auc(imp.items), mrr(imp.items), ndcg_at(imp.items, 5),
                   ndcg_at(imp.items, 10)}) {
      if (!m) continue;
      EXPECT_GE(*m, 0.0);
      EXPECT_LE(*m, 1.0);
    }
  }
}

TEST(Evaluate, ExcludesAndCountsInvalidImpressions) {
  std::vector<RankedImpression> imps = {
      {"a", items({0.9, 0.1}, {1, 0})},
      {"b", items({0.9, 0.8, 0.1}, {0, 1, 0})},
      {"c", items({0.4, 0.2}, {1, 1})},
      {"d", items({0.4, 0.2}, {0, 0})},
      {"e", items({0.5, 0.5}, {0, 1})},
  };
  auto r = evaluate(imps);
  EXPECT_EQ(r.n_impressions, 3u);
  EXPECT_EQ(r.n_excluded, 2u);
  EXPECT_EQ(r.n_tied, 1u);
  EXPECT_DOUBLE_EQ(r.auc, (1.0 + 0.5 + 0.5) / 3.0);
  EXPECT_DOUBLE_EQ(r.mrr, (1.0 + 0.5 + 0.5) / 3.0);
  auto j = r.to_json();
  for (const char* key : {"auc", "mrr", "ndcg5", "ndcg10", "n_impressions", "n_excluded"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Evaluate, GlobalAucPoolsPairs) {
  std::vector<RankedImpression> imps = {
      {"a", items({0.9, 0.8}, {1, 0})},
      {"b", items({0.2, 0.1}, {1, 0})},
  };
  EXPECT_DOUBLE_EQ(evaluate(imps).auc, 1.0);
  // Pooled: positives 0.9, 0.2 against negatives 0.8, 0.1 -> 3 of 4 pairs.
  auto g = evaluate(imps, AucMode::kGlobal);
  EXPECT_DOUBLE_EQ(g.auc, 0.75);
  EXPECT_EQ(g.to_json()["auc_mode"], "global");
}

TEST(Evaluate, EmptyInputGivesZeroCounts) {
  auto r = evaluate({});
  EXPECT_EQ(r.n_impressions, 0u);
  EXPECT_EQ(r.n_excluded, 0u);
}

TEST(Uvctr, Examples) {
  std::vector<ServingLogRecord> log;
  for (int u = 0; u < 20; ++u) log.push_back({1, "u" + std::to_string(u), true, u < 5});
  EXPECT_DOUBLE_EQ(*uvctr(log, 1, 1), 0.25);
  // Visiting again, or clicking on another day, still counts once.
  log.push_back({2, "u0", true, true});
  log.push_back({2, "u19", true, true});
  EXPECT_DOUBLE_EQ(*uvctr(log, 1, 2), 6.0 / 20.0);
  EXPECT_DOUBLE_EQ(*uvctr(log, 2, 2), 1.0);
  EXPECT_FALSE(uvctr(log, 5, 9));
  log.push_back({3, "u7", false, true});
  EXPECT_THROW(uvctr(log, 1, 3), DataError);
}

}  // namespace
}  // namespace viewflow
