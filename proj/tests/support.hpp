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

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "viewflow/model_config.hpp"
#include "viewflow/params.hpp"
#include "viewflow/pipeline.hpp"
#include "viewflow/training.hpp"

namespace viewflow::testing {

// A = 2, P = 3, D = 8, E = 4; two attributes with vocabularies of 2 and 1.
inline ModelConfig toy_config(AblationFlags flags = {}) {
  ModelConfig c;
  c.text_dim = 4;
  c.proj_dim = 3;
  c.attr_embed_dim = 2;
  c.attr_hidden_dim = 3;
  c.attr_out_dim = 2;
  c.max_history = 3;
  c.flags = flags;
  c.attributes = {AttributeSpec{"category", {}, {"sports", "tech"}},
                  AttributeSpec{"region", {}, {"eu"}}};
  return c;
}

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

// Parameters with every tensor, biases included, drawn at random so no
// gradient is trivially zero.
inline ModelParams random_params(const ModelConfig& config, std::uint64_t seed,
                                 double scale = 0.5) {
  ModelParams p = ModelParams::initialize(config, seed);
  std::mt19937_64 rng(seed + 101);
  std::normal_distribution<double> nd(0.0, scale);
  p.for_each_trainable([&](const std::string& name, Eigen::Map<Mat> t, bool) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = nd(rng);
    if (name == "encoder/bn_gamma") t.array() += 1.0;
  });
  p.bn_running_var = p.bn_running_var.array() + 0.5;
  return p;
}

// Articles "a0".."a{n-1}" with random frozen embeddings; attribute ids cycle
// through the toy vocabularies (0 is UNK).
inline PreparedDataset toy_dataset(const ModelConfig& config, std::size_t n_articles,
                                   std::size_t n_impressions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PreparedDataset d;
  const auto E = static_cast<Eigen::Index>(config.text_dim);
  for (std::size_t i = 0; i < n_articles; ++i) {
    ArticleFeatures f;
    f.id = "a" + std::to_string(i);
    f.title_emb = random_vec(rng, E);
    f.body_emb = random_vec(rng, E);
    for (std::size_t k = 0; k < config.attributes.size(); ++k) {
      const int rows = static_cast<int>(config.attributes[k].table_rows());
      f.attr_ids.push_back(static_cast<int>((i + k) % static_cast<std::size_t>(rows)));
    }
    d.article_index.emplace(f.id, d.article_ids.size());
    d.article_ids.push_back(f.id);
    d.features.push_back(std::move(f));
  }
  std::uniform_int_distribution<std::size_t> pick(0, n_articles - 1);
  for (std::size_t i = 0; i < n_impressions; ++i) {
    PreparedImpression imp;
    imp.id = "i" + std::to_string(i);
    imp.user_id = "u" + std::to_string(i % 3);
    const std::size_t hist = i % (config.max_history + 1);
    for (std::size_t h = 0; h < hist; ++h) imp.history.push_back(pick(rng));
    for (std::size_t c = 0; c < 3; ++c) {
      imp.candidates.push_back(pick(rng));
      imp.labels.push_back(static_cast<int>((i + c) % 2));
    }
    PreparedProfile prof;
    prof.id = "p" + std::to_string(i);
    prof.text = hist ? "profile" : "";
    prof.embedding = hist ? random_vec(rng, E) : Vec::Zero(E);
    imp.profile = d.profiles.size();
    d.profiles.push_back(std::move(prof));
    d.impressions.push_back(std::move(imp));
  }
  return d;
}

inline std::vector<TrainExample> all_examples(const PreparedDataset& d) {
  std::vector<TrainExample> out;
  for (std::size_t i = 0; i < d.impressions.size(); ++i) {
    for (std::size_t c = 0; c < d.impressions[i].candidates.size(); ++c) {
      out.push_back({i, c});
    }
  }
  return out;
}

// Norm-wise relative error between analytic and numeric gradients.
inline double relative_error(const Mat& analytic, const Mat& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / denom;
}

struct GradientCheck {
  std::string tensor;
  double rel_error = 0.0;
  double analytic_norm = 0.0;
};

// Central differences (step h) of the mean batch loss against the analytic
// gradients, one entry per trainable tensor.
inline std::vector<GradientCheck> check_gradients(const ModelConfig& config,
                                                  const ModelParams& params,
                                                  const PreparedDataset& data,
                                                  std::span<const TrainExample> batch,
                                                  double h = 1e-4) {
  ModelParams grads = ModelParams::zeros(config);
  batch_gradients(config, params, data, batch, 0.0, nullptr, grads);
  auto loss_at = [&](const ModelParams& p) {
    ModelParams scratch = ModelParams::zeros(config);
    return batch_gradients(config, p, data, batch, 0.0, nullptr, scratch).loss;
  };
  std::vector<Mat> analytic;
  grads.for_each_trainable([&](const std::string&, Eigen::Map<const Mat> t, bool) {
    analytic.emplace_back(t);
  });
  std::vector<GradientCheck> out;
  ModelParams probe = params;
  std::size_t k = 0;
  probe.for_each_trainable([&](const std::string& name, Eigen::Map<Mat> t, bool) {
    Mat numeric(t.rows(), t.cols());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double orig = t.data()[i];
      t.data()[i] = orig + h;
      const double up = loss_at(probe);
      t.data()[i] = orig - h;
      const double down = loss_at(probe);
      t.data()[i] = orig;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    out.push_back({name, relative_error(analytic[k], numeric), analytic[k].norm()});
    ++k;
  });
  return out;
}

}  // namespace viewflow::testing
