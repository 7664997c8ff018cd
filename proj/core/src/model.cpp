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

#include "viewflow/model.hpp"

#include <cmath>

#include "viewflow/error.hpp"

namespace viewflow {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

// In-place softmax with max subtraction.
void softmax(Vec& s) {
  double mx = s.maxCoeff();
  s = (s.array() - mx).exp().matrix();
  s /= s.sum();
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Scorer::Scorer(const ModelConfig& config, const ModelParams& params)
    : config_(config), params_(params) {
  if (params_.head_w.size() != idx(config_.head_dim())) {
    throw ConfigError("head expects " + std::to_string(params_.head_w.size()) +
                      " inputs but the configuration needs " +
                      std::to_string(config_.head_dim()));
  }
}

Vec Scorer::attention_weights(const Vec& candidate,
                              std::span<const Vec* const> history) const {
  if (history.empty()) throw ConfigError("attention over an empty history");
  Vec query = params_.bilinear.transpose() * candidate;
  Vec s(idx(history.size()));
  for (std::size_t i = 0; i < history.size(); ++i) {
    s[idx(i)] = query.dot(*history[i]);
  }
  softmax(s);
  return s;
}

Vec Scorer::instant_rep(const Vec& candidate, std::span<const Vec* const> history,
                        Vec* attention) const {
  Vec out = Vec::Zero(idx(config_.article_dim()));
  if (history.empty()) {
    if (attention != nullptr) attention->resize(0);
    return out;
  }
  Vec alpha = attention_weights(candidate, history);
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += alpha[idx(i)] * *history[i];
  }
  if (attention != nullptr) *attention = std::move(alpha);
  return out;
}

Vec Scorer::profile_vector(const Vec& profile_embedding) const {
  const auto A = idx(config_.attr_out_dim);
  const auto P = idx(config_.proj_dim);
  if (profile_embedding.size() != params_.title_w.cols()) {
    throw ConfigError("profile embedding has the wrong dimension");
  }
  Vec q = params_.title_w * profile_embedding + params_.title_b;
  Vec g(A + 2 * P);
  g.head(A).setZero();
  g.segment(A, P) = q;
  g.tail(P) = q;
  return g;
}

Vec Scorer::constant_rep(const Vec& profile, const Vec& candidate) const {
  if (profile.size() != candidate.size()) {
    throw ConfigError("profile vector has the wrong dimension");
  }
  if (!config_.flags.flow_gate) return profile;
  return profile.cwiseProduct(candidate);
}

Vec Scorer::user_rep(const Vec& candidate, std::span<const Vec* const> history,
                     const Vec& profile, Vec* attention) const {
  const auto D = idx(config_.article_dim());
  Vec u(idx(config_.user_dim()));
  Eigen::Index off = 0;
  if (config_.flags.instant_flow) {
    u.segment(off, D) = instant_rep(candidate, history, attention);
    off += D;
  }
  if (config_.flags.constant_flow) {
    u.segment(off, D) = constant_rep(profile, candidate);
  }
  return u;
}

double Scorer::logit(const Vec& user, const Vec& candidate) const {
  const auto U = user.size();
  return params_.head_w.head(U).dot(user) +
         params_.head_w.tail(candidate.size()).dot(candidate) + params_.head_b[0];
}

ScoredCandidate Scorer::score(const std::string& article_id, const Vec& candidate,
                              std::span<const Vec* const> history,
                              const Vec& profile) const {
  if (candidate.size() != idx(config_.article_dim())) {
    throw ConfigError("candidate rep has the wrong dimension");
  }
  Vec alpha;
  Vec u = user_rep(candidate, history, profile, &alpha);
  ScoredCandidate out;
  out.article_id = article_id;
  out.probability = sigmoid(logit(u, candidate));
  out.attention.assign(alpha.data(), alpha.data() + alpha.size());
  return out;
}

namespace {

struct ForwardState {
  Vec x;  // [ins | cons | h_c]
  Vec alpha;
  Vec query;  // W' h_c
  Vec g;
  double p = 0.5;
};

ForwardState forward(const ModelConfig& config, const ModelParams& params,
                     const std::vector<Vec>& reps, const ExampleRef& ex) {
  const auto D = idx(config.article_dim());
  const auto A = idx(config.attr_out_dim);
  const auto P = idx(config.proj_dim);
  const Vec& hc = reps[ex.candidate];
  ForwardState st;
  st.x.resize(idx(config.head_dim()));
  Eigen::Index off = 0;
  if (config.flags.instant_flow) {
    Vec ins = Vec::Zero(D);
    if (!ex.history.empty()) {
      st.query = params.bilinear.transpose() * hc;
      st.alpha.resize(idx(ex.history.size()));
      for (std::size_t i = 0; i < ex.history.size(); ++i) {
        st.alpha[idx(i)] = st.query.dot(reps[ex.history[i]]);
      }
      softmax(st.alpha);
      for (std::size_t i = 0; i < ex.history.size(); ++i) {
        ins += st.alpha[idx(i)] * reps[ex.history[i]];
      }
    }
    st.x.segment(off, D) = ins;
    off += D;
  }
  if (config.flags.constant_flow) {
    if (ex.profile_embedding == nullptr) {
      throw ConfigError("constant flow needs a profile embedding");
    }
    Vec q = params.title_w * *ex.profile_embedding + params.title_b;
    st.g.resize(D);
    st.g.head(A).setZero();
    st.g.segment(A, P) = q;
    st.g.tail(P) = q;
    st.x.segment(off, D) =
        config.flags.flow_gate ? Vec(st.g.cwiseProduct(hc)) : st.g;
    off += D;
  }
  st.x.segment(off, D) = hc;
  st.p = sigmoid(params.head_w.dot(st.x) + params.head_b[0]);
  return st;
}

}  // namespace

double example_forward(const ModelConfig& config, const ModelParams& params,
                       const std::vector<Vec>& reps, const ExampleRef& example) {
  return forward(config, params, reps, example).p;
}

double example_forward_backward(const ModelConfig& config,
                                const ModelParams& params,
                                const std::vector<Vec>& reps,
                                const ExampleRef& ex, double weight,
                                ModelParams& grads, std::vector<Vec>& d_reps) {
  const auto D = idx(config.article_dim());
  const auto A = idx(config.attr_out_dim);
  const auto P = idx(config.proj_dim);
  ForwardState st = forward(config, params, reps, ex);
  const double dlogit = (st.p - static_cast<double>(ex.label)) * weight;
  const Vec& hc = reps[ex.candidate];

  grads.head_w += dlogit * st.x;
  grads.head_b[0] += dlogit;
  Vec dx = dlogit * params.head_w;

  Vec& d_hc = d_reps[ex.candidate];
  d_hc += dx.tail(D);
  Eigen::Index off = 0;
  if (config.flags.instant_flow) {
    if (!ex.history.empty()) {
      Vec d_ins = dx.segment(off, D);
      const std::size_t n = ex.history.size();
      Vec d_alpha(idx(n));
      for (std::size_t i = 0; i < n; ++i) {
        d_alpha[idx(i)] = d_ins.dot(reps[ex.history[i]]);
      }
      const double mean = st.alpha.dot(d_alpha);
      Vec d_s = st.alpha.cwiseProduct((d_alpha.array() - mean).matrix());
      Vec r = Vec::Zero(D);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec& hi = reps[ex.history[i]];
        r += d_s[idx(i)] * hi;
        d_reps[ex.history[i]] += st.alpha[idx(i)] * d_ins + d_s[idx(i)] * st.query;
      }
      grads.bilinear.noalias() += hc * r.transpose();
      d_hc.noalias() += params.bilinear * r;
    }
    off += D;
  }
  if (config.flags.constant_flow) {
    Vec d_cons = dx.segment(off, D);
    Vec d_g;
    if (config.flags.flow_gate) {
      d_g = d_cons.cwiseProduct(hc);
      d_hc += d_cons.cwiseProduct(st.g);
    } else {
      d_g = d_cons;
    }
    Vec d_q = d_g.segment(A, P) + d_g.tail(P);
    grads.title_w.noalias() += d_q * ex.profile_embedding->transpose();
    grads.title_b += d_q;
  }
  return st.p;
}

}  // namespace viewflow
