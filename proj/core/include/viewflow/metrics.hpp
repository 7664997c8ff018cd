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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace viewflow {

struct RankedItem {
  double score = 0.0;
  int label = 0;
};

struct RankedImpression {
  std::string impression_id;
  std::vector<RankedItem> items;

  std::size_t positives() const;
  std::size_t negatives() const;
  // True when any two scores are equal.
  bool has_ties() const;
};

// Rank positions (1-based) after sorting by score descending, input order
// breaking ties.
std::vector<std::size_t> rank_positions(std::span<const RankedItem> items);

// Probability that a positive outscores a negative, ties counting 0.5.
// Needs at least one positive and one negative.
std::optional<double> auc(std::span<const RankedItem> items);

// Mean reciprocal rank over every positive. Needs at least one positive.
std::optional<double> mrr(std::span<const RankedItem> items);

// DCG@k / ideal DCG@k with binary gains and log2(rank + 1) discounts.
std::optional<double> ndcg_at(std::span<const RankedItem> items, std::size_t k);

enum class AucMode { kImpressionMean, kGlobal };

struct EvalReport {
  double auc = 0.0;
  double mrr = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  std::size_t n_impressions = 0;  // impressions contributing to AUC
  std::size_t n_excluded = 0;     // lacking a positive or a negative
  std::size_t n_tied = 0;         // impressions with tied scores
  AucMode auc_mode = AucMode::kImpressionMean;

  nlohmann::json to_json() const;
};

// Impression-grouped metrics. Impressions lacking a positive or a negative
// are excluded from every metric and counted in n_excluded.
EvalReport evaluate(std::span<const RankedImpression> impressions,
                    AucMode mode = AucMode::kImpressionMean);

// One day of one user's homepage activity.
struct ServingLogRecord {
  std::int64_t day = 0;
  std::string user_id;
  bool visited_homepage = false;
  bool clicked_any = false;
};

// Unique clicking users over unique visiting users among records with
// first_day <= day <= last_day. Absent when nobody visited. Throws
// DataError for a click without a visit.
std::optional<double> uvctr(std::span<const ServingLogRecord> log,
                            std::int64_t first_day, std::int64_t last_day);

}  // namespace viewflow
