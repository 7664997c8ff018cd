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

#include "viewflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "viewflow/error.hpp"

namespace viewflow {

std::size_t RankedImpression::positives() const {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [](const RankedItem& i) { return i.label == 1; }));
}

std::size_t RankedImpression::negatives() const {
  return items.size() - positives();
}

bool RankedImpression::has_ties() const {
  std::vector<double> s;
  s.reserve(items.size());
  for (const auto& i : items) s.push_back(i.score);
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

std::vector<std::size_t> rank_positions(std::span<const RankedItem> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score > items[b].score;
  });
  std::vector<std::size_t> rank(items.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

std::optional<double> auc(std::span<const RankedItem> items) {
  // Mann-Whitney U with mid-ranks for ties.
  const std::size_t n = items.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].score < items[b].score;
  });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && items[order[j + 1]].score == items[order[i]].score) ++j;
    // Ascending ranks i+1 .. j+1 share their mean.
    double mid = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      if (items[order[k]].label == 1) {
        pos_rank_sum += mid;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                                static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> mrr(std::span<const RankedItem> items) {
  auto rank = rank_positions(items);
  std::vector<std::size_t> pos_ranks;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].label == 1) pos_ranks.push_back(rank[i]);
  }
  if (pos_ranks.empty()) return std::nullopt;
  std::sort(pos_ranks.begin(), pos_ranks.end());
  double sum = 0.0;
  for (std::size_t r : pos_ranks) sum += 1.0 / static_cast<double>(r);
  return sum / static_cast<double>(pos_ranks.size());
}

std::optional<double> ndcg_at(std::span<const RankedItem> items, std::size_t k) {
  auto rank = rank_positions(items);
  std::vector<std::size_t> pos_ranks;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].label == 1) pos_ranks.push_back(rank[i]);
  }
  if (pos_ranks.empty()) return std::nullopt;
  std::sort(pos_ranks.begin(), pos_ranks.end());
  double dcg = 0.0;
  for (std::size_t r : pos_ranks) {
    if (r <= k) dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(k, pos_ranks.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  return dcg / idcg;
}

nlohmann::json EvalReport::to_json() const {
  return {{"auc", auc},
          {"mrr", mrr},
          {"ndcg5", ndcg5},
          {"ndcg10", ndcg10},
          {"n_impressions", n_impressions},
          {"n_excluded", n_excluded},
          {"n_tied", n_tied},
          {"auc_mode", auc_mode == AucMode::kGlobal ? "global" : "impression"}};
}

EvalReport evaluate(std::span<const RankedImpression> impressions, AucMode mode) {
  EvalReport rep;
  rep.auc_mode = mode;
  double s_auc = 0.0, s_mrr = 0.0, s_n5 = 0.0, s_n10 = 0.0;
  std::vector<RankedItem> pooled;
  for (const auto& imp : impressions) {
    auto a = auc(imp.items);
    if (!a) {
      ++rep.n_excluded;
      continue;
    }
    ++rep.n_impressions;
    if (imp.has_ties()) ++rep.n_tied;
    s_auc += *a;
    s_mrr += *mrr(imp.items);
    s_n5 += *ndcg_at(imp.items, 5);
    s_n10 += *ndcg_at(imp.items, 10);
    if (mode == AucMode::kGlobal) {
      pooled.insert(pooled.end(), imp.items.begin(), imp.items.end());
    }
  }
  if (rep.n_impressions == 0) return rep;
  const double n = static_cast<double>(rep.n_impressions);
  rep.auc = mode == AucMode::kGlobal ? auc(pooled).value_or(0.0) : s_auc / n;
  rep.mrr = s_mrr / n;
  rep.ndcg5 = s_n5 / n;
  rep.ndcg10 = s_n10 / n;
  return rep;
}

std::optional<double> uvctr(std::span<const ServingLogRecord> log,
                            std::int64_t first_day, std::int64_t last_day) {
  std::set<std::string> visitors;
  std::set<std::string> clickers;
  for (const auto& r : log) {
    if (r.clicked_any && !r.visited_homepage) {
      throw DataError("user " + r.user_id + " clicked without visiting on day " +
                      std::to_string(r.day));
    }
    if (r.day < first_day || r.day > last_day) continue;
    if (r.visited_homepage) visitors.insert(r.user_id);
    if (r.clicked_any) clickers.insert(r.user_id);
  }
  if (visitors.empty()) return std::nullopt;
  return static_cast<double>(clickers.size()) /
         static_cast<double>(visitors.size());
}

}  // namespace viewflow
