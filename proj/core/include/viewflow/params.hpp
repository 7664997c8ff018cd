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
#include <functional>
#include <string>
#include <vector>

#include "viewflow/model_config.hpp"
#include "viewflow/tensor_io.hpp"

namespace viewflow {

// Every trainable tensor of the model plus the batch-norm running
// statistics. Tensors absent under the current ablation flags are empty.
struct ModelParams {
  // Encoder.
  Mat title_w;  // P x E
  Vec title_b;  // P
  Mat body_w;   // P x E
  Vec body_b;   // P
  std::vector<Mat> attr_tables;  // per attribute: rows x attr_embed_dim
  Mat mlp_w1;    // H x (K * attr_embed_dim)
  Vec mlp_b1;    // H
  Vec bn_gamma;  // H, batch_norm only
  Vec bn_beta;   // H, batch_norm only
  Mat mlp_w2;    // A x H
  Vec mlp_b2;    // A
  // Scorer.
  Mat bilinear;  // D x D, instant_flow only
  Vec head_w;    // user_dim + D
  Vec head_b;    // 1

  // Not trained by gradient; updated as moving averages in train mode.
  Vec bn_running_mean;
  Vec bn_running_var;

  // Zero tensors with the shapes `config` requires.
  static ModelParams zeros(const ModelConfig& config);

  // Identity-plus-noise bilinear matrix (sigma 0.01), Xavier-uniform head,
  // projections and MLP, N(0, 0.1) attribute tables, zero biases.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  using Visitor = std::function<void(const std::string& name, Eigen::Map<Mat> t,
                                     bool is_vector)>;
  using ConstVisitor = std::function<void(
      const std::string& name, Eigen::Map<const Mat> t, bool is_vector)>;

  // Visits trainable tensors in a fixed order. Empty tensors are skipped.
  void for_each_trainable(const Visitor& fn);
  void for_each_trainable(const ConstVisitor& fn) const;

  // Trainable tensors followed by buffers ("bn/running_mean", ...).
  void for_each_tensor(const ConstVisitor& fn) const;

  std::size_t trainable_count() const;

  // Throws ConfigError when any tensor's shape disagrees with `config`.
  void check_shapes(const ModelConfig& config) const;

  void set_zero();
  // this += alpha * other, trainable tensors only.
  void add_scaled(const ModelParams& other, double alpha);
};

}  // namespace viewflow
