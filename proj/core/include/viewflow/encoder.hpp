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

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "viewflow/article.hpp"
#include "viewflow/embedder.hpp"
#include "viewflow/model_config.hpp"
#include "viewflow/params.hpp"

namespace viewflow {

// Frozen inputs of one article: text embeddings and attribute indices.
struct ArticleFeatures {
  std::string id;
  Vec title_emb;
  Vec body_emb;  // summary when use_summaries, raw body otherwise
  std::vector<int> attr_ids;
};

class FeatureBuilder {
 public:
  FeatureBuilder(ModelConfig config, std::shared_ptr<const TextEmbedder> embedder);

  // Throws DataError when summaries are enabled and the article has none.
  ArticleFeatures build(const Article& article) const;

  Vec embed_profile(const std::string& profile_id, const std::string& text) const;

  const TextEmbedder& embedder() const { return *embedder_; }
  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
  std::shared_ptr<const TextEmbedder> embedder_;
};

// Builds the embedder named by the config's embedder spec.
std::shared_ptr<const TextEmbedder> make_embedder(const ModelConfig& config);

// h = [h_a | h_t | h_b].
struct ArticleRep {
  Vec h;
  std::size_t attr_dim = 0;
  std::size_t proj_dim = 0;

  auto h_a() const { return h.head(static_cast<Eigen::Index>(attr_dim)); }
  auto h_t() const {
    return h.segment(static_cast<Eigen::Index>(attr_dim),
                     static_cast<Eigen::Index>(proj_dim));
  }
  auto h_b() const { return h.tail(static_cast<Eigen::Index>(proj_dim)); }
};

enum class TextField { kTitle, kBody };

// Eval-mode article encoder: batch-norm running statistics, no dropout.
// Read-only over the parameters, so concurrent use is safe.
class ArticleEncoder {
 public:
  ArticleEncoder(const ModelConfig& config, const ModelParams& params);

  // Affine projection of a frozen text embedding. Throws ConfigError on a
  // dimension mismatch.
  Vec project(const Vec& embedding, TextField which) const;

  // Table lookups, concatenation, then the one-hidden-layer MLP.
  Vec encode_attributes(const std::vector<int>& attr_ids) const;

  ArticleRep encode(const ArticleFeatures& features) const;

 private:
  const ModelConfig& config_;
  const ModelParams& params_;
};

// Concatenated attribute embeddings for one article.
Vec gather_attribute_embeddings(const ModelConfig& config,
                                const ModelParams& params,
                                const std::vector<int>& attr_ids);

// Train-mode forward over a batch of distinct articles with the
// intermediates kept for the backward pass. Batch normalization uses the
// batch statistics; dropout masks come from `rng`.
class EncoderBatch {
 public:
  struct Options {
    bool train = true;
    double dropout = 0.0;
  };

  EncoderBatch(const ModelConfig& config, const ModelParams& params,
               std::vector<const ArticleFeatures*> articles, Options options,
               std::mt19937_64* rng);

  std::size_t size() const { return articles_.size(); }
  const Vec& rep(std::size_t i) const { return reps_[i]; }
  const std::vector<Vec>& reps() const { return reps_; }

  // Accumulates into `grads` given dL/dh for every article.
  void backward(const std::vector<Vec>& d_reps, ModelParams& grads) const;

  // Moves the running statistics towards this batch's statistics.
  void update_running_stats(ModelParams& params) const;

 private:
  const ModelConfig& config_;
  const ModelParams& params_;
  std::vector<const ArticleFeatures*> articles_;
  Options options_;
  std::vector<Vec> reps_;
  // Columns are articles.
  Mat z_;
  Mat pre_;
  Mat xhat_;
  Mat act_;
  Mat mask_;  // inverted-dropout scale per unit, 0 where dropped
  Vec batch_mean_;
  Vec batch_var_;
};

}  // namespace viewflow
