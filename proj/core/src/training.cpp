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

#include "viewflow/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "viewflow/checkpoint.hpp"
#include "viewflow/encoder.hpp"
#include "viewflow/error.hpp"
#include "viewflow/model.hpp"

namespace viewflow {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("dropout must be in [0, 1)");
  }
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw ConfigError("val_fraction must be in [0, 1)");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size},
          {"dropout", dropout},             {"max_steps", max_steps},
          {"eval_every", eval_every},       {"patience", patience},
          {"negative_ratio", negative_ratio}, {"seed", seed},
          {"val_fraction", val_fraction}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be an object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "max_steps") c.max_steps = value.get<std::size_t>();
      else if (key == "eval_every") c.eval_every = value.get<std::size_t>();
      else if (key == "patience") c.patience = value.get<std::size_t>();
      else if (key == "negative_ratio") c.negative_ratio = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "val_fraction") c.val_fraction = value.get<double>();
      else throw ConfigError("unknown train key: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("train." + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

double bce_loss(double p, int label) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double mean_bce_loss(std::span<const double> probabilities,
                     std::span<const int> labels) {
  if (probabilities.size() != labels.size()) {
    throw ConfigError("loss: probability and label counts differ");
  }
  if (probabilities.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    sum += bce_loss(probabilities[i], labels[i]);
  }
  return sum / static_cast<double>(probabilities.size());
}

AdamState AdamState::zeros(const ModelConfig& config) {
  AdamState s;
  s.m = ModelParams::zeros(config);
  s.v = ModelParams::zeros(config);
  return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, t);

  std::vector<Eigen::Map<Mat>> p, m, v;
  std::vector<Eigen::Map<const Mat>> g;
  params.for_each_trainable(
      [&](const std::string&, Eigen::Map<Mat> t, bool) { p.push_back(t); });
  state.m.for_each_trainable(
      [&](const std::string&, Eigen::Map<Mat> t, bool) { m.push_back(t); });
  state.v.for_each_trainable(
      [&](const std::string&, Eigen::Map<Mat> t, bool) { v.push_back(t); });
  grads.for_each_trainable(
      [&](const std::string&, Eigen::Map<const Mat> t, bool) { g.push_back(t); });
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ConfigError("adam: tensor count mismatch");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size() || p[k].size() != m[k].size()) {
      throw ConfigError("adam: tensor shape mismatch");
    }
    m[k] = AdamState::kBeta1 * m[k] + (1.0 - AdamState::kBeta1) * g[k];
    v[k] = AdamState::kBeta2 * v[k] +
           (1.0 - AdamState::kBeta2) * g[k].cwiseProduct(g[k]);
    p[k].array() -= learning_rate * (m[k].array() / c1) /
                    ((v[k].array() / c2).sqrt() + AdamState::kEpsilon);
  }
}

std::vector<TrainExample> build_examples(const PreparedDataset& data,
                                         std::size_t negative_ratio,
                                         std::uint64_t seed) {
  std::vector<TrainExample> out;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < data.impressions.size(); ++i) {
    const auto& imp = data.impressions[i];
    std::vector<std::size_t> negatives;
    std::size_t positives = 0;
    for (std::size_t c = 0; c < imp.labels.size(); ++c) {
      if (imp.labels[c] == 1) {
        out.push_back({i, c});
        ++positives;
      } else {
        negatives.push_back(c);
      }
    }
    if (negative_ratio > 0) {
      const std::size_t keep =
          std::min(negatives.size(), negative_ratio * std::max<std::size_t>(positives, 1));
      std::shuffle(negatives.begin(), negatives.end(), rng);
      negatives.resize(keep);
      std::sort(negatives.begin(), negatives.end());
    }
    for (std::size_t c : negatives) out.push_back({i, c});
  }
  return out;
}

BatchResult batch_gradients(const ModelConfig& config, const ModelParams& params,
                            const PreparedDataset& data,
                            std::span<const TrainExample> batch, double dropout,
                            std::mt19937_64* rng, ModelParams& grads,
                            ModelParams* running_stats) {
  grads.set_zero();
  BatchResult result;
  if (batch.empty()) return result;

  // Unique articles touched by the batch, in first-seen order.
  std::unordered_map<std::size_t, std::size_t> local;
  std::vector<const ArticleFeatures*> articles;
  auto slot = [&](std::size_t corpus_index) {
    auto [it, inserted] = local.emplace(corpus_index, articles.size());
    if (inserted) articles.push_back(&data.features[corpus_index]);
    return it->second;
  };
  std::vector<ExampleRef> refs;
  refs.reserve(batch.size());
  for (const auto& ex : batch) {
    const auto& imp = data.impressions.at(ex.impression);
    ExampleRef ref;
    ref.candidate = slot(imp.candidates.at(ex.candidate));
    ref.label = imp.labels[ex.candidate];
    if (config.flags.instant_flow) {
      for (std::size_t h : imp.history) ref.history.push_back(slot(h));
    }
    ref.profile_embedding = &data.profiles[imp.profile].embedding;
    refs.push_back(std::move(ref));
  }

  EncoderBatch enc(config, params, std::move(articles),
                   {.train = true, .dropout = dropout}, rng);
  std::vector<Vec> d_reps(enc.size(), Vec::Zero(config.article_dim()));
  const double weight = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  result.probabilities.reserve(refs.size());
  for (const auto& ref : refs) {
    const double p =
        example_forward_backward(config, params, enc.reps(), ref, weight, grads, d_reps);
    result.probabilities.push_back(p);
    loss += bce_loss(p, ref.label);
  }
  result.loss = loss * weight;
  enc.backward(d_reps, grads);
  if (running_stats) enc.update_running_stats(*running_stats);
  return result;
}

void write_train_log_csv(std::ostream& out, std::span<const TrainLogRow> rows) {
  out << "step,loss,val_auc,val_mrr,wall_ms\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.loss << ',' << r.val_auc << ',' << r.val_mrr << ','
        << r.wall_ms << '\n';
  }
}

namespace {

std::string dump_batch(const PreparedDataset& data,
                       std::span<const TrainExample> batch,
                       const std::vector<double>& probabilities) {
  std::ostringstream os;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& imp = data.impressions[batch[i].impression];
    os << "\n  " << imp.id << ' '
       << data.article_ids[imp.candidates[batch[i].candidate]]
       << " y=" << imp.labels[batch[i].candidate];
    if (i < probabilities.size()) os << " p=" << probabilities[i];
  }
  return os.str();
}

}  // namespace

TrainResult train(const ModelConfig& config, const TrainConfig& tc,
                  const PreparedDataset& train_data,
                  const PreparedDataset* val_data, ModelParams init,
                  const StepCallback& on_eval) {
  config.validate();
  tc.validate();
  init.check_shapes(config);
  auto examples = build_examples(train_data, tc.negative_ratio, tc.seed);
  if (examples.empty()) throw DataError("training set has no examples");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  TrainResult result;
  ModelParams params = std::move(init);
  ModelParams grads = ModelParams::zeros(config);
  AdamState adam = AdamState::zeros(config);
  std::mt19937_64 rng(tc.seed);

  ModelParams best = params;
  double best_auc = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  // Returns true when training should stop.
  auto evaluate_now = [&](std::size_t step) {
    TrainLogRow row;
    row.step = step;
    row.loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    loss_sum = 0.0;
    loss_count = 0;
    bool stop = false;
    if (val_data) {
      ModelParams rounded = params;
      round_to_storage_precision(rounded);
      auto report = evaluate_model(config, rounded, *val_data).report;
      row.val_auc = report.auc;
      row.val_mrr = report.mrr;
      if (row.val_auc > best_auc) {
        best_auc = row.val_auc;
        best = params;
        result.best_step = step;
        since_best = 0;
      } else if (++since_best >= tc.patience && tc.patience > 0) {
        stop = true;
      }
    }
    row.wall_ms = elapsed_ms();
    result.log.push_back(row);
    if (on_eval) on_eval(row);
    return stop;
  };

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  const std::size_t bs = std::min(tc.batch_size, examples.size());
  std::vector<TrainExample> batch(bs);

  std::size_t step = 0;
  if (tc.max_steps == 0) {
    evaluate_now(0);
  }
  while (step < tc.max_steps) {
    for (std::size_t i = 0; i < bs; ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch[i] = examples[order[cursor++]];
    }
    auto br = batch_gradients(config, params, train_data, batch, tc.dropout, &rng,
                              grads, &params);
    if (!std::isfinite(br.loss)) {
      throw RuntimeFailure("non-finite loss at step " + std::to_string(step + 1) +
                           "; batch:" + dump_batch(train_data, batch, br.probabilities));
    }
    adam_step(params, grads, adam, tc.learning_rate);
    ++step;
    result.step_losses.push_back(br.loss);
    loss_sum += br.loss;
    ++loss_count;
    const bool periodic = tc.eval_every > 0 && step % tc.eval_every == 0;
    if (periodic || step == tc.max_steps) {
      if (evaluate_now(step)) {
        result.early_stopped = true;
        break;
      }
    }
  }
  result.steps_run = step;
  result.params = val_data ? std::move(best) : std::move(params);
  if (!val_data) result.best_step = step;
  round_to_storage_precision(result.params);
  result.best_val_auc = val_data ? best_auc : 0.0;
  return result;
}

}  // namespace viewflow
