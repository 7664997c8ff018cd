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
#include <cstdint>
#include <filesystem>
#include <random>

#include "support.hpp"
#include "viewflow/encoder.hpp"
#include "viewflow/error.hpp"

namespace viewflow {
namespace {

using testing::random_params;
using testing::random_vec;
using testing::toy_config;

// Independent FNV-1a and signed hashing, written without the library.
std::vector<double> hashed_oracle(const std::vector<std::string>& tokens,
                                  std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  for (const auto& t : tokens) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : t) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    v[h % dim] += (h >> 32) & 1 ? -1.0 : 1.0;
  }
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0) {
    for (double& x : v) x /= n;
  }
  return v;
}

TEST(HashedEmbedder, EmptyAndStopwordOnlyTextIsZero) {
  HashedEmbedder e(8);
  EXPECT_EQ(e.embed("k", ""), Vec::Zero(8));
  EXPECT_EQ(e.embed("k", "the of and"), Vec::Zero(8));
}

TEST(HashedEmbedder, MatchesOracle) {
  HashedEmbedder e(8);
  auto want = hashed_oracle({"foo", "bar"}, 8);
  Vec got = e.embed("k", "foo bar");
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(got[i], want[i]);
  EXPECT_NEAR(got.norm(), 1.0, 1e-12);
  // Case and punctuation do not matter; repetition does.
  EXPECT_EQ(e.embed("k", "FOO, bar!"), got);
  auto want3 = hashed_oracle({"foo", "foo", "bar"}, 64);
  Vec got3 = HashedEmbedder(64).embed("k", "foo foo bar");
  for (std::size_t i = 0; i < 64; ++i) EXPECT_DOUBLE_EQ(got3[i], want3[i]);
}

TEST(HashedEmbedder, KeyIsIgnored) {
  HashedEmbedder e(16);
  EXPECT_EQ(e.embed("a", "some words"), e.embed("b", "some words"));
  EXPECT_THROW(HashedEmbedder(0), ConfigError);
}

TEST(PrecomputedEmbedder, SaveLoadRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "viewflow_emb.bin";
  Vec a(3), b(3);
  a << 0.5, -1.0, 2.0;
  b << 0.0, 0.25, -0.125;
  save_precomputed_embeddings(path.string(), 3, {{"x/title", a}, {"y/body", b}});
  auto e = PrecomputedEmbedder::load(path.string());
  EXPECT_EQ(e.dim(), 3u);
  EXPECT_EQ(e.size(), 2u);
  EXPECT_EQ(e.embed("x/title", "ignored"), a);
  EXPECT_EQ(e.embed("y/body", ""), b);
  EXPECT_THROW(e.embed("missing", "text"), DataError);
  EXPECT_THROW(save_precomputed_embeddings(path.string(), 2, {{"x", a}}), DataError);
}

TEST(Projection, MatchesAffineOracle) {
  auto config = toy_config();
  auto p = random_params(config, 3);
  ArticleEncoder enc(config, p);
  std::mt19937_64 rng(1);
  Vec x = random_vec(rng, 4);
  Vec got = enc.project(x, TextField::kTitle);
  for (Eigen::Index r = 0; r < 3; ++r) {
    double want = p.title_b[r];
    for (Eigen::Index c = 0; c < 4; ++c) want += p.title_w(r, c) * x[c];
    EXPECT_NEAR(got[r], want, 1e-12);
  }
  Vec body = enc.project(x, TextField::kBody);
  EXPECT_NEAR((body - (p.body_w * x + p.body_b)).norm(), 0.0, 1e-12);
}

TEST(Projection, IdentityWeightsPassThrough) {
  auto config = toy_config();
  config.proj_dim = 4;
  auto p = ModelParams::zeros(config);
  p.title_w = Mat::Identity(4, 4);
  ArticleEncoder enc(config, p);
  Vec x(4);
  x << 1, -2, 3, -4;
  EXPECT_EQ(enc.project(x, TextField::kTitle), x);
}

TEST(Projection, DimensionMismatchIsConfigError) {
  auto config = toy_config();
  auto p = random_params(config, 3);
  ArticleEncoder enc(config, p);
  EXPECT_THROW(enc.project(Vec::Zero(5), TextField::kTitle), ConfigError);
}

// One-hidden-layer attribute MLP evaluated by hand.
TEST(AttributeMlp, MatchesHandComputation) {
  ModelConfig config;
  config.text_dim = 2;
  config.proj_dim = 1;
  config.attr_embed_dim = 1;
  config.attr_hidden_dim = 2;
  config.attr_out_dim = 1;
  config.batch_norm = false;
  config.attributes = {AttributeSpec{"c", {}, {"x", "y"}}};
  auto p = ModelParams::zeros(config);
  p.attr_tables[0] << 0.0, 1.0, -2.0;  // UNK, x, y
  p.mlp_w1 << 0.5, -1.0;
  p.mlp_b1 << 0.1, 0.2;
  p.mlp_w2 << 2.0, 3.0;
  p.mlp_b2 << -0.5;
  ArticleEncoder enc(config, p);
  // id 2 ("y"): z = -2, pre = (-0.9, 2.2).
  double want = 2.0 * std::tanh(-0.9) + 3.0 * std::tanh(2.2) - 0.5;
  EXPECT_NEAR(enc.encode_attributes({2})[0], want, 1e-12);
  // UNK row is zero: pre = (0.1, 0.2).
  want = 2.0 * std::tanh(0.1) + 3.0 * std::tanh(0.2) - 0.5;
  EXPECT_NEAR(enc.encode_attributes({0})[0], want, 1e-12);
  // Out-of-range ids fall back to UNK.
  EXPECT_NEAR(enc.encode_attributes({7})[0], want, 1e-12);
}

TEST(AttributeMlp, EvalBatchNormUsesRunningStatistics) {
  auto config = toy_config();
  auto p = random_params(config, 5);
  ArticleEncoder enc(config, p);
  std::vector<int> ids{1, 1};
  Vec z = gather_attribute_embeddings(config, p, ids);
  Vec pre = p.mlp_w1 * z + p.mlp_b1;
  Vec y(3);
  for (int i = 0; i < 3; ++i) {
    y[i] = std::tanh(p.bn_gamma[i] * (pre[i] - p.bn_running_mean[i]) /
                         std::sqrt(p.bn_running_var[i] + config.bn_eps) +
                     p.bn_beta[i]);
  }
  Vec want = p.mlp_w2 * y + p.mlp_b2;
  EXPECT_NEAR((enc.encode_attributes(ids) - want).norm(), 0.0, 1e-12);
}

TEST(AttributeMlp, AllUnknownWithZeroTablesIsBiasOnly) {
  auto config = toy_config();
  auto p = random_params(config, 5);
  for (auto& t : p.attr_tables) t.setZero();
  ArticleEncoder enc(config, p);
  Vec a = enc.encode_attributes({0, 0});
  Vec b = enc.encode_attributes({});
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.allFinite());
}

ArticleFeatures toy_features(std::uint64_t seed, std::vector<int> ids = {1, 1}) {
  std::mt19937_64 rng(seed);
  ArticleFeatures f;
  f.id = "a" + std::to_string(seed);
  f.title_emb = random_vec(rng, 4);
  f.body_emb = random_vec(rng, 4);
  f.attr_ids = std::move(ids);
  return f;
}

TEST(ArticleEncoder, ConcatenatesThreeSlices) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  ArticleEncoder enc(config, p);
  auto f = toy_features(1);
  auto rep = enc.encode(f);
  ASSERT_EQ(rep.h.size(), static_cast<Eigen::Index>(config.attr_out_dim + 2 * config.proj_dim));
  EXPECT_EQ(rep.h_a(), enc.encode_attributes(f.attr_ids));
  EXPECT_EQ(rep.h_t(), enc.project(f.title_emb, TextField::kTitle));
  EXPECT_EQ(rep.h_b(), enc.project(f.body_emb, TextField::kBody));
}

TEST(ArticleEncoder, SlicesAreIndependent) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  ArticleEncoder enc(config, p);
  auto f = toy_features(1);
  auto base = enc.encode(f);
  auto g = f;
  g.body_emb *= -3.0;
  auto changed = enc.encode(g);
  EXPECT_EQ(base.h_a(), changed.h_a());
  EXPECT_EQ(base.h_t(), changed.h_t());
  EXPECT_NE(base.h_b(), changed.h_b());
  g = f;
  g.attr_ids = {2, 0};
  changed = enc.encode(g);
  EXPECT_NE(base.h_a(), changed.h_a());
  EXPECT_EQ(base.h_t(), changed.h_t());
  EXPECT_EQ(base.h_b(), changed.h_b());
}

TEST(ArticleEncoder, DimensionIsAttrPlusTwoProjections) {
  for (std::size_t a : {1u, 5u}) {
    for (std::size_t pdim : {2u, 7u}) {
      auto config = toy_config();
      config.attr_out_dim = a;
      config.proj_dim = pdim;
      auto p = ModelParams::initialize(config, 1);
      EXPECT_EQ(static_cast<std::size_t>(ArticleEncoder(config, p).encode(toy_features(2)).h.size()),
                a + 2 * pdim);
    }
  }
}

TEST(EncoderBatch, EvalModeMatchesArticleEncoder) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  auto f1 = toy_features(1, {1, 1}), f2 = toy_features(2, {2, 0});
  EncoderBatch batch(config, p, {&f1, &f2}, {false, 0.5}, nullptr);
  ArticleEncoder enc(config, p);
  EXPECT_NEAR((batch.rep(0) - enc.encode(f1).h).norm(), 0.0, 1e-12);
  EXPECT_NEAR((batch.rep(1) - enc.encode(f2).h).norm(), 0.0, 1e-12);
}

TEST(EncoderBatch, TrainModeNormalizesOverTheBatch) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  p.bn_gamma.setOnes();
  p.bn_beta.setZero();
  p.mlp_w2 = Mat::Identity(2, 3);
  p.mlp_b2.setZero();
  std::vector<ArticleFeatures> fs;
  for (int i = 0; i < 6; ++i) fs.push_back(toy_features(i, {i % 3, i % 2}));
  std::vector<const ArticleFeatures*> ptrs;
  for (auto& f : fs) ptrs.push_back(&f);
  EncoderBatch batch(config, p, ptrs, {true, 0.0}, nullptr);
  // Before tanh the first two hidden units have zero mean over the batch;
  // tanh is odd, so atanh of h_a recovers them.
  for (int unit = 0; unit < 2; ++unit) {
    double sum = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) sum += std::atanh(batch.rep(i)[unit]);
    EXPECT_NEAR(sum, 0.0, 1e-9);
  }
}

TEST(EncoderBatch, RunningStatisticsMoveTowardsBatch) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  auto f1 = toy_features(1, {1, 1}), f2 = toy_features(2, {2, 0});
  EncoderBatch batch(config, p, {&f1, &f2}, {true, 0.0}, nullptr);
  ModelParams updated = p;
  batch.update_running_stats(updated);
  Mat z(4, 2);
  z.col(0) = gather_attribute_embeddings(config, p, f1.attr_ids);
  z.col(1) = gather_attribute_embeddings(config, p, f2.attr_ids);
  Mat pre = (p.mlp_w1 * z).colwise() + p.mlp_b1;
  Vec mean = pre.rowwise().mean();
  Vec var = (pre.colwise() - mean).array().square().rowwise().sum();  // m - 1 = 1
  const double mom = config.bn_momentum;
  EXPECT_NEAR((updated.bn_running_mean - ((1 - mom) * p.bn_running_mean + mom * mean)).norm(),
              0.0, 1e-12);
  EXPECT_NEAR((updated.bn_running_var - ((1 - mom) * p.bn_running_var + mom * var)).norm(),
              0.0, 1e-12);
}

TEST(EncoderBatch, DropoutDependsOnSeedOnlyInTraining) {
  auto config = toy_config();
  auto p = random_params(config, 9);
  std::vector<ArticleFeatures> fs;
  for (int i = 0; i < 4; ++i) fs.push_back(toy_features(i, {i % 3, i % 2}));
  std::vector<const ArticleFeatures*> ptrs;
  for (auto& f : fs) ptrs.push_back(&f);
  std::mt19937_64 r1(1), r2(2), r1b(1);
  EncoderBatch a(config, p, ptrs, {true, 0.5}, &r1);
  EncoderBatch b(config, p, ptrs, {true, 0.5}, &r2);
  EncoderBatch a2(config, p, ptrs, {true, 0.5}, &r1b);
  bool differs = false;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    differs |= a.rep(i) != b.rep(i);
    EXPECT_EQ(a.rep(i), a2.rep(i));
    // Dropout never touches the text slices.
    EXPECT_EQ(a.rep(i).tail(6), b.rep(i).tail(6));
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(EncoderBatch(config, p, ptrs, {true, 0.5}, nullptr), ConfigError);
  EncoderBatch e1(config, p, ptrs, {false, 0.5}, nullptr);
  EncoderBatch e2(config, p, ptrs, {false, 0.5}, nullptr);
  for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_EQ(e1.rep(i), e2.rep(i));
}

Article text_article() {
  Article a;
  a.id = "N1";
  a.title = "Rust compiler notes";
  a.body = "A long body about borrow checking and lifetimes.";
  a.attributes = {{"category", "tech"}, {"region", "eu"}};
  return a;
}

AblationFlags raw_bodies() {
  AblationFlags f;
  f.use_summaries = false;
  return f;
}

TEST(FeatureBuilder, BuildsTextAndAttributeInputs) {
  auto config = toy_config(raw_bodies());
  auto emb = std::make_shared<HashedEmbedder>(4);
  FeatureBuilder fb(config, emb);
  auto a = text_article();
  auto f = fb.build(a);
  EXPECT_EQ(f.title_emb, emb->embed("", a.title));
  EXPECT_EQ(f.body_emb, emb->embed("", a.body));
  EXPECT_EQ(f.attr_ids, (std::vector<int>{2, 1}));
  a.attributes = {{"category", "politics"}};
  EXPECT_EQ(fb.build(a).attr_ids, (std::vector<int>{0, 0}));
}

TEST(FeatureBuilder, SummaryReplacesBodyWhenEnabled) {
  AblationFlags flags;
  flags.use_summaries = true;
  auto config = toy_config(flags);
  auto emb = std::make_shared<HashedEmbedder>(4);
  FeatureBuilder fb(config, emb);
  auto a = text_article();
  EXPECT_THROW(fb.build(a), DataError);
  a.summary = "Short summary of compiler work";
  EXPECT_EQ(fb.build(a).body_emb, emb->embed("", *a.summary));
  // The title slice is unaffected by the toggle.
  FeatureBuilder raw(toy_config(raw_bodies()), emb);
  EXPECT_EQ(fb.build(a).title_emb, raw.build(a).title_emb);
  EXPECT_EQ(raw.build(a).body_emb, emb->embed("", a.body));
  // Empty bodies need no summary.
  a.summary.reset();
  a.body = "";
  EXPECT_EQ(fb.build(a).body_emb, Vec::Zero(4));
}

TEST(FeatureBuilder, ColdStartProfileIsZero) {
  auto config = toy_config();
  FeatureBuilder fb(config, std::make_shared<HashedEmbedder>(4));
  EXPECT_EQ(fb.embed_profile("p", ""), Vec::Zero(4));
  EXPECT_THROW(FeatureBuilder(config, std::make_shared<HashedEmbedder>(5)), ConfigError);
}

TEST(AttributeSpec, BucketsNumericValues) {
  AttributeSpec s{"age", {10.0, 20.0}, {"b0", "b1", "b2"}};
  EXPECT_EQ(s.token_for({{"age", "5"}}), "b0");
  EXPECT_EQ(s.token_for({{"age", "10"}}), "b1");
  EXPECT_EQ(s.token_for({{"age", "25.5"}}), "b2");
  EXPECT_EQ(s.token_for({{"age", "old"}}), "");
  EXPECT_EQ(s.index_of("b1"), 2);
  EXPECT_EQ(s.index_of("zzz"), 0);
}

}  // namespace
}  // namespace viewflow
