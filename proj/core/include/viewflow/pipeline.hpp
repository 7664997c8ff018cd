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

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "viewflow/article.hpp"
#include "viewflow/encoder.hpp"
#include "viewflow/metrics.hpp"
#include "viewflow/model.hpp"
#include "viewflow/summarizer.hpp"

namespace viewflow {

using UserAttributes = std::map<std::string, std::map<std::string, std::string>>;

// Produces the constant-interest profile text for a (user, history) pair.
// With use_instruct_u the summarizer writes it; without, the raw visited
// titles are used. An empty history yields an empty profile.
class ProfileProvider {
 public:
  ProfileProvider(std::shared_ptr<Summarizer> summarizer, bool use_instruct_u,
                  UserAttributes user_attributes = {});

  // Stable id of (user, history), used as the profile cache key.
  static std::string profile_id(const std::string& user_id,
                                std::span<const std::string> history_ids);

  std::string profile_text(const std::string& user_id,
                           std::span<const Article* const> history);

 private:
  std::shared_ptr<Summarizer> summarizer_;
  bool use_instruct_u_;
  UserAttributes user_attributes_;
  std::unordered_map<std::string, std::string> memo_;
};

struct PreparedImpression {
  std::string id;
  std::string user_id;
  std::vector<std::size_t> history;  // article indices, truncated to max_history
  std::vector<std::size_t> candidates;
  std::vector<int> labels;
  std::size_t profile = 0;  // index into PreparedDataset::profiles
};

struct PreparedProfile {
  std::string id;
  std::string text;
  Vec embedding;
};

// Frozen features for every corpus article and profile embeddings for
// every impression.
struct PreparedDataset {
  std::vector<std::string> article_ids;
  std::vector<ArticleFeatures> features;  // by corpus index
  std::vector<PreparedProfile> profiles;
  std::vector<PreparedImpression> impressions;
  std::unordered_map<std::string, std::size_t> article_index;
};

// History ids the model reads for an impression: the most recent
// max_history entries, oldest first.
std::vector<std::string> model_history(const ModelConfig& config,
                                       const std::vector<std::string>& history);

PreparedDataset prepare_dataset(const Corpus& corpus,
                                std::span<const Impression> impressions,
                                const FeatureBuilder& features,
                                ProfileProvider& profiles);

// Eval-mode reps of every article, by corpus index.
std::vector<Vec> encode_articles(const ModelConfig& config,
                                 const ModelParams& params,
                                 std::span<const ArticleFeatures> features);

// Scores one impression's candidates from precomputed reps.
std::vector<ScoredCandidate> score_impression(const ModelConfig& config,
                                              const ModelParams& params,
                                              const PreparedDataset& data,
                                              const std::vector<Vec>& reps,
                                              const PreparedImpression& imp);

struct EvaluationOutput {
  EvalReport report;
  std::vector<std::vector<ScoredCandidate>> scores;  // per impression
};

EvaluationOutput evaluate_model(const ModelConfig& config,
                                const ModelParams& params,
                                const PreparedDataset& data,
                                AucMode mode = AucMode::kImpressionMean);

}  // namespace viewflow
