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

#include "viewflow/params.hpp"

#include <cmath>
#include <random>

#include "viewflow/error.hpp"

namespace viewflow {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

void xavier(Mat& m, std::mt19937_64& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

template <typename Self, typename Fn>
void visit_trainable(Self& p, Fn&& fn) {
  using MapT = std::conditional_t<std::is_const_v<Self>, Eigen::Map<const Mat>,
                                  Eigen::Map<Mat>>;
  auto mat = [&](const char* name, auto& m) {
    if (m.size() == 0) return;
    fn(std::string(name), MapT(m.data(), m.rows(), m.cols()), false);
  };
  auto vec = [&](const char* name, auto& v) {
    if (v.size() == 0) return;
    fn(std::string(name), MapT(v.data(), v.size(), 1), true);
  };
  mat("encoder/title_w", p.title_w);
  vec("encoder/title_b", p.title_b);
  mat("encoder/body_w", p.body_w);
  vec("encoder/body_b", p.body_b);
  for (std::size_t k = 0; k < p.attr_tables.size(); ++k) {
    auto& t = p.attr_tables[k];
    fn("encoder/attr_table_" + std::to_string(k),
       MapT(t.data(), t.rows(), t.cols()), false);
  }
  mat("encoder/mlp_w1", p.mlp_w1);
  vec("encoder/mlp_b1", p.mlp_b1);
  vec("encoder/bn_gamma", p.bn_gamma);
  vec("encoder/bn_beta", p.bn_beta);
  mat("encoder/mlp_w2", p.mlp_w2);
  vec("encoder/mlp_b2", p.mlp_b2);
  mat("scorer/bilinear", p.bilinear);
  vec("scorer/head_w", p.head_w);
  vec("scorer/head_b", p.head_b);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  const auto E = idx(config.text_dim);
  const auto P = idx(config.proj_dim);
  const auto H = idx(config.attr_hidden_dim);
  const auto A = idx(config.attr_out_dim);
  const auto D = idx(config.article_dim());
  const auto K = idx(config.attributes.size());
  ModelParams p;
  p.title_w = Mat::Zero(P, E);
  p.title_b = Vec::Zero(P);
  p.body_w = Mat::Zero(P, E);
  p.body_b = Vec::Zero(P);
  for (const auto& a : config.attributes) {
    p.attr_tables.push_back(
        Mat::Zero(idx(a.table_rows()), idx(config.attr_embed_dim)));
  }
  p.mlp_w1 = Mat::Zero(H, K * idx(config.attr_embed_dim));
  p.mlp_b1 = Vec::Zero(H);
  if (config.batch_norm) {
    p.bn_gamma = Vec::Zero(H);
    p.bn_beta = Vec::Zero(H);
    p.bn_running_mean = Vec::Zero(H);
    p.bn_running_var = Vec::Ones(H);
  }
  p.mlp_w2 = Mat::Zero(A, H);
  p.mlp_b2 = Vec::Zero(A);
  if (config.flags.instant_flow) p.bilinear = Mat::Zero(D, D);
  p.head_w = Vec::Zero(idx(config.head_dim()));
  p.head_b = Vec::Zero(1);
  return p;
}

ModelParams ModelParams::initialize(const ModelConfig& config,
                                    std::uint64_t seed) {
  ModelParams p = zeros(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  xavier(p.title_w, rng);
  xavier(p.body_w, rng);
  for (auto& t : p.attr_tables) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = 0.1 * normal(rng);
    }
  }
  if (p.mlp_w1.size() > 0) xavier(p.mlp_w1, rng);
  xavier(p.mlp_w2, rng);
  if (config.batch_norm) p.bn_gamma.setOnes();
  if (config.flags.instant_flow) {
    p.bilinear.setIdentity();
    for (Eigen::Index c = 0; c < p.bilinear.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.bilinear.rows(); ++r) {
        p.bilinear(r, c) += 0.01 * normal(rng);
      }
    }
  }
  Mat head(1, p.head_w.size());
  xavier(head, rng);
  p.head_w = head.row(0).transpose();
  return p;
}

void ModelParams::for_each_trainable(const Visitor& fn) {
  visit_trainable(*this, fn);
}

void ModelParams::for_each_trainable(const ConstVisitor& fn) const {
  visit_trainable(*this, fn);
}

void ModelParams::for_each_tensor(const ConstVisitor& fn) const {
  for_each_trainable(fn);
  if (bn_running_mean.size() > 0) {
    fn("buffer/bn_running_mean",
       Eigen::Map<const Mat>(bn_running_mean.data(), bn_running_mean.size(), 1),
       true);
    fn("buffer/bn_running_var",
       Eigen::Map<const Mat>(bn_running_var.data(), bn_running_var.size(), 1),
       true);
  }
}

std::size_t ModelParams::trainable_count() const {
  std::size_t n = 0;
  for_each_trainable(ConstVisitor(
      [&](const std::string&, Eigen::Map<const Mat> t, bool) {
        n += static_cast<std::size_t>(t.size());
      }));
  return n;
}

void ModelParams::check_shapes(const ModelConfig& config) const {
  ModelParams expected = zeros(config);
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> want;
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> got;
  auto collect = [](auto& out) {
    return ConstVisitor([&out](const std::string& n, Eigen::Map<const Mat> t,
                               bool) {
      out.push_back({n, {t.rows(), t.cols()}});
    });
  };
  expected.for_each_tensor(collect(want));
  for_each_tensor(collect(got));
  if (want != got) {
    for (std::size_t i = 0; i < std::max(want.size(), got.size()); ++i) {
      if (i >= want.size() || i >= got.size() || want[i] != got[i]) {
        std::string name = i < got.size() ? got[i].first : want[i].first;
        throw ConfigError("parameter shape mismatch at " + name);
      }
    }
  }
}

void ModelParams::set_zero() {
  for_each_trainable(Visitor(
      [](const std::string&, Eigen::Map<Mat> t, bool) { t.setZero(); }));
}

void ModelParams::add_scaled(const ModelParams& other, double alpha) {
  std::vector<Eigen::Map<const Mat>> src;
  other.for_each_trainable(ConstVisitor(
      [&](const std::string&, Eigen::Map<const Mat> t, bool) {
        src.push_back(t);
      }));
  std::size_t i = 0;
  for_each_trainable(Visitor([&](const std::string& n, Eigen::Map<Mat> t, bool) {
    if (i >= src.size() || src[i].rows() != t.rows() ||
        src[i].cols() != t.cols()) {
      throw ConfigError("add_scaled shape mismatch at " + n);
    }
    t += alpha * src[i];
    ++i;
  }));
}

}  // namespace viewflow
