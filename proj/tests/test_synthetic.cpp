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

#include <cmath>
#include <set>
#include <sstream>

#include "viewflow/error.hpp"
#include "viewflow/ingest.hpp"
#include "viewflow/synthetic.hpp"

namespace viewflow {
namespace {

std::string serialize(const Dataset& d) {
  std::ostringstream os;
  write_jsonl(os, d);
  return os.str();
}

TEST(Synthetic, SameSeedIsByteIdentical) {
  SyntheticSpec spec;
  spec.n_impressions = 300;
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  EXPECT_EQ(serialize(a.dataset), serialize(b.dataset));
  spec.seed = 8;
  EXPECT_NE(serialize(a.dataset), serialize(generate_synthetic(spec).dataset));
}

TEST(Synthetic, SingleTopicSharesOneCategory) {
  SyntheticSpec spec;
  spec.topic_count = 1;
  spec.n_impressions = 50;
  for (auto rule : {ClickRule::kPlantedBilinear, ClickRule::kTopicAffinity}) {
    spec.click_rule = rule;
    auto d = generate_synthetic(spec);
    std::set<std::string> cats;
    for (const auto& a : d.dataset.corpus.articles()) cats.insert(a.category());
    EXPECT_EQ(cats.size(), 1u);
  }
}

// Monte-Carlo check of the planted rule: the realized positive rate must
// sit near the mean of the per-slot click probabilities.
TEST(Synthetic, PositiveRateMatchesAnalyticMean) {
  SyntheticSpec spec;
  spec.seed = 7;
  spec.n_users = 50;
  spec.n_articles = 200;
  for (auto rule : {ClickRule::kPlantedBilinear, ClickRule::kTopicAffinity}) {
    spec.click_rule = rule;
    auto d = generate_synthetic(spec);
    auto stats = compute_stats(d.dataset);
    const double empirical =
        static_cast<double>(stats.n_positive) / static_cast<double>(stats.n_candidates);
    EXPECT_NEAR(empirical, d.truth.analytic_positive_rate(), 0.05) << to_string(rule);
  }
}

TEST(Synthetic, ReferencesResolveAndShapesHold) {
  SyntheticSpec spec;
  spec.n_impressions = 200;
  for (auto rule : {ClickRule::kPlantedBilinear, ClickRule::kTopicAffinity}) {
    spec.click_rule = rule;
    auto d = generate_synthetic(spec);
    EXPECT_TRUE(find_dangling_references(d.dataset).empty());
    EXPECT_EQ(d.dataset.corpus.size(), spec.n_articles);
    EXPECT_EQ(d.dataset.impressions.size(), spec.n_impressions);
    ASSERT_EQ(d.truth.candidate_probability.size(), spec.n_impressions);
    for (std::size_t i = 0; i < spec.n_impressions; ++i) {
      const auto& imp = d.dataset.impressions[i];
      EXPECT_EQ(imp.candidates.size(), spec.candidates_per_impression);
      EXPECT_LE(imp.history.size(), spec.history_length);
      EXPECT_EQ(d.truth.candidate_probability[i].size(), imp.candidates.size());
      std::set<std::string> seen(imp.history.begin(), imp.history.end());
      for (const auto& c : imp.candidates) {
        EXPECT_TRUE(seen.insert(c.article_id).second) << "repeat in " << imp.id;
      }
    }
  }
}

TEST(Synthetic, PlantedProbabilitiesFollowTheBilinearRule) {
  SyntheticSpec spec;
  spec.n_impressions = 20;
  auto d = generate_synthetic(spec);
  const auto& t = d.truth;
  for (std::size_t i = 0; i < d.dataset.impressions.size(); ++i) {
    const auto& imp = d.dataset.impressions[i];
    const std::size_t u = std::stoul(imp.user_id.substr(1));
    for (std::size_t c = 0; c < imp.candidates.size(); ++c) {
      const std::size_t a = std::stoul(imp.candidates[c].article_id.substr(1));
      double s = 0.0;
      for (std::size_t x = 0; x < spec.embed_dim; ++x) {
        for (std::size_t y = 0; y < spec.embed_dim; ++y) {
          s += t.user_vectors[u][x] * t.matrix[x][y] * t.article_vectors[a][y];
        }
      }
      const double p = 1.0 / (1.0 + std::exp(-spec.planted_scale * s /
                                             std::sqrt(double(spec.embed_dim))));
      EXPECT_NEAR(t.candidate_probability[i][c], p, 1e-12);
    }
  }
}

TEST(Synthetic, InvalidSpecIsRejected) {
  SyntheticSpec spec;
  spec.n_users = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  EXPECT_THROW(click_rule_from_string("nope"), ConfigError);
  EXPECT_EQ(click_rule_from_string("topic-affinity"), ClickRule::kTopicAffinity);
}

}  // namespace
}  // namespace viewflow
