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
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "viewflow/metrics.hpp"
#include "viewflow/model_config.hpp"
#include "viewflow/params.hpp"
#include "viewflow/pipeline.hpp"

namespace viewflow {

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 512;
  double dropout = 0.1;
  std::size_t max_steps = 600000;
  // Validation every eval_every steps; 0 evaluates only at the end.
  std::size_t eval_every = 500;
  // Evaluations without AUC improvement before stopping; 0 disables.
  std::size_t patience = 5;
  // Negatives kept per positive within an impression; 0 keeps all.
  std::size_t negative_ratio = 0;
  std::uint64_t seed = 7;
  // Held-out fraction (latest impressions) when no split is given.
  double val_fraction = 0.05;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

inline constexpr double kProbabilityClamp = 1e-7;

// Binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int label);
double mean_bce_loss(std::span<const double> probabilities,
                     std::span<const int> labels);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  static AdamState zeros(const ModelConfig& config);
};

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate);

// One (impression, candidate) training pair.
struct TrainExample {
  std::size_t impression = 0;
  std::size_t candidate = 0;  // position within the impression
};

std::vector<TrainExample> build_examples(const PreparedDataset& data,
                                         std::size_t negative_ratio,
                                         std::uint64_t seed);

struct BatchResult {
  double loss = 0.0;
  std::vector<double> probabilities;
};

// Train-mode forward and backward over one batch. Gradients of the mean
// loss are written to `grads` (overwritten). `rng` drives dropout. When
// `running_stats` is set its batch-norm buffers move towards this batch.
BatchResult batch_gradients(const ModelConfig& config, const ModelParams& params,
                            const PreparedDataset& data,
                            std::span<const TrainExample> batch, double dropout,
                            std::mt19937_64* rng, ModelParams& grads,
                            ModelParams* running_stats = nullptr);

struct TrainLogRow {
  std::size_t step = 0;
  double loss = 0.0;  // mean training loss since the previous row
  double val_auc = 0.0;
  double val_mrr = 0.0;
  double wall_ms = 0.0;
};

void write_train_log_csv(std::ostream& out, std::span<const TrainLogRow> rows);

struct TrainResult {
  ModelParams params;  // best by validation AUC, rounded to float32
  std::size_t best_step = 0;
  double best_val_auc = 0.0;
  std::size_t steps_run = 0;
  bool early_stopped = false;
  std::vector<TrainLogRow> log;
  std::vector<double> step_losses;
};

using StepCallback = std::function<void(const TrainLogRow&)>;

// Trains from `init`. Without validation data the final parameters are
// returned. Throws DataError on an empty training set and RuntimeFailure
// on a non-finite loss.
TrainResult train(const ModelConfig& config, const TrainConfig& train_config,
                  const PreparedDataset& train_data,
                  const PreparedDataset* val_data, ModelParams init,
                  const StepCallback& on_eval = {});

}  // namespace viewflow
