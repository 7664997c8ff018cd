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
#include <map>
#include <string>
#include <vector>

#include "viewflow/article.hpp"

namespace viewflow {

enum class ClickRule {
  // label ~ Bernoulli(sigmoid(scale * u'Mv / sqrt(dim))) with planted user
  // vectors u, article vectors v and matrix M.
  kPlantedBilinear,
  // Mixture of a profile-driven rule (candidate topic equals the user's
  // long-running topic) and a recency-driven rule (candidate topic equals the
  // topic of the most recent, fresh history articles).
  kTopicAffinity,
};

std::string to_string(ClickRule rule);
ClickRule click_rule_from_string(const std::string& s);

struct SyntheticSpec {
  std::size_t n_users = 50;
  std::size_t n_articles = 200;
  std::size_t n_impressions = 2000;
  std::size_t embed_dim = 8;
  std::size_t topic_count = 10;
  std::uint64_t seed = 7;
  ClickRule click_rule = ClickRule::kPlantedBilinear;
  std::size_t history_length = 30;
  std::size_t candidates_per_impression = 10;
  // Logit scale of the planted-bilinear rule.
  double planted_scale = 6.0;

  // Throws ConfigError.
  void validate() const;
};

struct GroundTruth {
  ClickRule rule = ClickRule::kPlantedBilinear;
  std::vector<std::vector<double>> user_vectors;     // by user index
  std::vector<std::vector<double>> article_vectors;  // by article index
  std::vector<std::vector<double>> matrix;           // embed_dim x embed_dim
  std::vector<std::size_t> article_topic;
  std::vector<std::size_t> user_topic;  // topic-affinity: long-running topic
  // Click probability of every candidate slot, impression-major.
  std::vector<std::vector<double>> candidate_probability;

  // Mean of candidate_probability over all slots.
  double analytic_positive_rate() const;
};

struct SyntheticData {
  Dataset dataset;
  GroundTruth truth;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

std::string user_name(std::size_t index);
std::string article_name(std::size_t index);
std::string topic_name(std::size_t index);

}  // namespace viewflow
