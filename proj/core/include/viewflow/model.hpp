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

#include <span>
#include <string>
#include <vector>

#include "viewflow/encoder.hpp"
#include "viewflow/model_config.hpp"
#include "viewflow/params.hpp"

namespace viewflow {

struct ScoredCandidate {
  std::string article_id;
  double probability = 0.5;  // P(y = 1)
  // Attention over the history, empty for a cold-start user or when the
  // instant flow is disabled.
  std::vector<double> attention;

  double probability_negative() const { return 1.0 - probability; }
};

// Candidate-conditioned user modelling and the click head. Read-only over
// the parameters.
class Scorer {
 public:
  Scorer(const ModelConfig& config, const ModelParams& params);

  // softmax_i(h_c' W h_i) with max subtraction. History must be non-empty.
  Vec attention_weights(const Vec& candidate,
                        std::span<const Vec* const> history) const;

  // Attention-weighted sum of the history; the zero vector for an empty
  // history.
  Vec instant_rep(const Vec& candidate, std::span<const Vec* const> history,
                  Vec* attention = nullptr) const;

  // Projects a frozen profile embedding through the title projection and
  // lays it out like an article rep: [0_A | q | q].
  Vec profile_vector(const Vec& profile_embedding) const;

  // profile ⊙ candidate with the flow gate, the profile vector itself
  // without it. `profile` comes from profile_vector(); unused when the
  // constant flow is off.
  Vec constant_rep(const Vec& profile, const Vec& candidate) const;

  // [instant | constant], omitting disabled flows.
  Vec user_rep(const Vec& candidate, std::span<const Vec* const> history,
               const Vec& profile, Vec* attention = nullptr) const;

  double logit(const Vec& user, const Vec& candidate) const;

  ScoredCandidate score(const std::string& article_id, const Vec& candidate,
                        std::span<const Vec* const> history,
                        const Vec& profile) const;

  const ModelConfig& config() const { return config_; }

 private:
  const ModelConfig& config_;
  const ModelParams& params_;
};

double sigmoid(double x);

// One (history, candidate, label) example, indices into a batch's article
// reps.
struct ExampleRef {
  std::size_t candidate = 0;
  std::vector<std::size_t> history;
  const Vec* profile_embedding = nullptr;
  int label = 0;
};

// Forward and backward for one example. dL/dlogit = (p - y) * weight is
// pushed into `grads` (scorer tensors and the shared title projection) and
// `d_reps` (per article rep). Returns p.
double example_forward_backward(const ModelConfig& config,
                                const ModelParams& params,
                                const std::vector<Vec>& reps,
                                const ExampleRef& example, double weight,
                                ModelParams& grads, std::vector<Vec>& d_reps);

// Forward only, same arithmetic as the training path.
double example_forward(const ModelConfig& config, const ModelParams& params,
                       const std::vector<Vec>& reps, const ExampleRef& example);

}  // namespace viewflow
