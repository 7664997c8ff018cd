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

#include "viewflow/encoder.hpp"

#include "viewflow/error.hpp"
#include "viewflow/text.hpp"

namespace viewflow {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

FeatureBuilder::FeatureBuilder(ModelConfig config,
                               std::shared_ptr<const TextEmbedder> embedder)
    : config_(std::move(config)), embedder_(std::move(embedder)) {
  if (!embedder_) throw ConfigError("feature builder needs an embedder");
  if (embedder_->dim() != config_.text_dim) {
    throw ConfigError("embedder dimension " + std::to_string(embedder_->dim()) +
                      " != model text_dim " + std::to_string(config_.text_dim));
  }
}

ArticleFeatures FeatureBuilder::build(const Article& article) const {
  ArticleFeatures f;
  f.id = article.id;
  f.title_emb = embedder_->embed(title_key(article.id), article.title);
  if (config_.flags.use_summaries && !text::trim(article.body).empty()) {
    if (!article.summary) {
      throw DataError("article " + article.id +
                      " has no summary but summarized bodies are enabled");
    }
    f.body_emb = embedder_->embed(body_key(article.id), *article.summary);
  } else {
    f.body_emb = embedder_->embed(body_key(article.id), article.body);
  }
  f.attr_ids.reserve(config_.attributes.size());
  for (const auto& spec : config_.attributes) {
    f.attr_ids.push_back(spec.index_of(spec.token_for(article.attributes)));
  }
  return f;
}

Vec FeatureBuilder::embed_profile(const std::string& profile_id,
                                  const std::string& text) const {
  // Cold-start users have no profile; no backend lookup for them.
  if (text.empty()) return Vec::Zero(static_cast<Eigen::Index>(embedder_->dim()));
  return embedder_->embed(profile_key(profile_id), text);
}

std::shared_ptr<const TextEmbedder> make_embedder(const ModelConfig& config) {
  if (config.embedder.kind == "hashed") {
    return std::make_shared<HashedEmbedder>(config.text_dim);
  }
  if (config.embedder.kind == "precomputed") {
    return std::make_shared<PrecomputedEmbedder>(
        PrecomputedEmbedder::load(config.embedder.path));
  }
  throw ConfigError("unknown embedder kind: " + config.embedder.kind);
}

ArticleEncoder::ArticleEncoder(const ModelConfig& config,
                               const ModelParams& params)
    : config_(config), params_(params) {}

Vec ArticleEncoder::project(const Vec& embedding, TextField which) const {
  const Mat& w = which == TextField::kTitle ? params_.title_w : params_.body_w;
  const Vec& b = which == TextField::kTitle ? params_.title_b : params_.body_b;
  if (embedding.size() != w.cols()) {
    throw ConfigError("projection expects dimension " +
                      std::to_string(w.cols()) + ", got " +
                      std::to_string(embedding.size()));
  }
  return w * embedding + b;
}

Vec gather_attribute_embeddings(const ModelConfig& config,
                                const ModelParams& params,
                                const std::vector<int>& attr_ids) {
  const auto d = idx(config.attr_embed_dim);
  const std::size_t k_count = config.attributes.size();
  Vec z(d * idx(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    int row = k < attr_ids.size() ? attr_ids[k] : 0;
    const Mat& table = params.attr_tables[k];
    if (row < 0 || row >= table.rows()) row = 0;
    z.segment(idx(k) * d, d) = table.row(row).transpose();
  }
  return z;
}

Vec ArticleEncoder::encode_attributes(const std::vector<int>& attr_ids) const {
  Vec z = gather_attribute_embeddings(config_, params_, attr_ids);
  Vec pre = params_.mlp_w1 * z + params_.mlp_b1;
  if (config_.batch_norm) {
    Vec inv_std = (params_.bn_running_var.array() + config_.bn_eps).rsqrt();
    pre = (params_.bn_gamma.array() *
               ((pre - params_.bn_running_mean).array() * inv_std.array()) +
           params_.bn_beta.array())
              .matrix();
  }
  Vec act = pre.array().tanh().matrix();
  return params_.mlp_w2 * act + params_.mlp_b2;
}

ArticleRep ArticleEncoder::encode(const ArticleFeatures& f) const {
  const auto A = idx(config_.attr_out_dim);
  const auto P = idx(config_.proj_dim);
  ArticleRep rep;
  rep.attr_dim = config_.attr_out_dim;
  rep.proj_dim = config_.proj_dim;
  rep.h.resize(A + 2 * P);
  rep.h.head(A) = encode_attributes(f.attr_ids);
  rep.h.segment(A, P) = project(f.title_emb, TextField::kTitle);
  rep.h.tail(P) = project(f.body_emb, TextField::kBody);
  return rep;
}

EncoderBatch::EncoderBatch(const ModelConfig& config, const ModelParams& params,
                           std::vector<const ArticleFeatures*> articles,
                           Options options, std::mt19937_64* rng)
    : config_(config),
      params_(params),
      articles_(std::move(articles)),
      options_(options) {
  const auto m = idx(articles_.size());
  const auto H = idx(config_.attr_hidden_dim);
  const auto A = idx(config_.attr_out_dim);
  const auto P = idx(config_.proj_dim);
  const auto kd = idx(config_.attributes.size() * config_.attr_embed_dim);
  z_.resize(kd, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    z_.col(i) = gather_attribute_embeddings(config_, params_, articles_[i]->attr_ids);
  }
  pre_ = params_.mlp_w1 * z_;
  pre_.colwise() += params_.mlp_b1;

  Mat y;
  if (config_.batch_norm) {
    Vec inv_std;
    if (options_.train) {
      batch_mean_ = pre_.rowwise().mean();
      Mat centered = pre_.colwise() - batch_mean_;
      batch_var_ = centered.array().square().rowwise().mean().matrix();
      inv_std = (batch_var_.array() + config_.bn_eps).rsqrt().matrix();
      xhat_ = centered.array().colwise() * inv_std.array();
    } else {
      inv_std = (params_.bn_running_var.array() + config_.bn_eps).rsqrt().matrix();
      Mat centered = pre_.colwise() - params_.bn_running_mean;
      xhat_ = centered.array().colwise() * inv_std.array();
    }
    y = (xhat_.array().colwise() * params_.bn_gamma.array()).matrix();
    y.colwise() += params_.bn_beta;
  } else {
    y = pre_;
  }
  act_ = y.array().tanh().matrix();
  mask_ = Mat::Ones(H, m);
  if (options_.train && options_.dropout > 0.0) {
    if (rng == nullptr) throw ConfigError("dropout needs a random generator");
    std::bernoulli_distribution keep(1.0 - options_.dropout);
    const double scale = 1.0 / (1.0 - options_.dropout);
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index r = 0; r < H; ++r) {
        mask_(r, c) = keep(*rng) ? scale : 0.0;
      }
    }
  }
  Mat dropped = act_.cwiseProduct(mask_);
  Mat h_a = params_.mlp_w2 * dropped;
  h_a.colwise() += params_.mlp_b2;

  reps_.resize(articles_.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    Vec& h = reps_[static_cast<std::size_t>(i)];
    h.resize(A + 2 * P);
    h.head(A) = h_a.col(i);
    h.segment(A, P) = params_.title_w * articles_[i]->title_emb + params_.title_b;
    h.tail(P) = params_.body_w * articles_[i]->body_emb + params_.body_b;
  }
}

void EncoderBatch::backward(const std::vector<Vec>& d_reps,
                            ModelParams& grads) const {
  const auto m = idx(articles_.size());
  if (d_reps.size() != articles_.size()) {
    throw ConfigError("encoder backward: gradient count mismatch");
  }
  if (m == 0) return;
  const auto A = idx(config_.attr_out_dim);
  const auto P = idx(config_.proj_dim);
  const auto d = idx(config_.attr_embed_dim);

  Mat d_ha(A, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec& g = d_reps[static_cast<std::size_t>(i)];
    d_ha.col(i) = g.head(A);
    Vec d_ht = g.segment(A, P);
    Vec d_hb = g.tail(P);
    grads.title_w.noalias() += d_ht * articles_[i]->title_emb.transpose();
    grads.title_b += d_ht;
    grads.body_w.noalias() += d_hb * articles_[i]->body_emb.transpose();
    grads.body_b += d_hb;
  }

  Mat dropped = act_.cwiseProduct(mask_);
  grads.mlp_w2.noalias() += d_ha * dropped.transpose();
  grads.mlp_b2 += d_ha.rowwise().sum();
  Mat d_act = (params_.mlp_w2.transpose() * d_ha).cwiseProduct(mask_);
  Mat d_y = d_act.array() * (1.0 - act_.array().square());

  Mat d_pre;
  if (config_.batch_norm) {
    grads.bn_gamma += d_y.cwiseProduct(xhat_).rowwise().sum();
    grads.bn_beta += d_y.rowwise().sum();
    Mat d_xhat = d_y.array().colwise() * params_.bn_gamma.array();
    if (options_.train) {
      Vec inv_std = (batch_var_.array() + config_.bn_eps).rsqrt().matrix();
      Vec sum_dx = d_xhat.rowwise().sum();
      Vec sum_dx_xhat = d_xhat.cwiseProduct(xhat_).rowwise().sum();
      const double mm = static_cast<double>(m);
      d_pre = (mm * d_xhat).colwise() - sum_dx;
      d_pre -= (xhat_.array().colwise() * sum_dx_xhat.array()).matrix();
      d_pre = (d_pre.array().colwise() * (inv_std.array() / mm)).matrix();
    } else {
      Vec inv_std =
          (params_.bn_running_var.array() + config_.bn_eps).rsqrt().matrix();
      d_pre = d_xhat.array().colwise() * inv_std.array();
    }
  } else {
    d_pre = d_y;
  }
  grads.mlp_w1.noalias() += d_pre * z_.transpose();
  grads.mlp_b1 += d_pre.rowwise().sum();
  if (z_.rows() == 0) return;
  Mat d_z = params_.mlp_w1.transpose() * d_pre;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& ids = articles_[i]->attr_ids;
    for (std::size_t k = 0; k < grads.attr_tables.size(); ++k) {
      int row = k < ids.size() ? ids[k] : 0;
      Mat& table = grads.attr_tables[k];
      if (row < 0 || row >= table.rows()) row = 0;
      table.row(row) += d_z.block(idx(k) * d, i, d, 1).transpose();
    }
  }
}

void EncoderBatch::update_running_stats(ModelParams& params) const {
  if (!config_.batch_norm || !options_.train || articles_.empty()) return;
  const double mom = config_.bn_momentum;
  const double m = static_cast<double>(articles_.size());
  // Unbiased variance for the running estimate.
  Vec unbiased = m > 1.0 ? Vec(batch_var_ * (m / (m - 1.0))) : batch_var_;
  params.bn_running_mean = (1.0 - mom) * params.bn_running_mean + mom * batch_mean_;
  params.bn_running_var = (1.0 - mom) * params.bn_running_var + mom * unbiased;
}

}  // namespace viewflow
