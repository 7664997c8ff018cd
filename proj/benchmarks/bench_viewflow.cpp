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


#include <benchmark/benchmark.h>

#include <random>

#include "viewflow/checkpoint.hpp"
#include "viewflow/pipeline.hpp"
#include "viewflow/serving.hpp"
#include "viewflow/synthetic.hpp"
#include "viewflow/training.hpp"
#include "viewflow/workflow.hpp"

namespace viewflow {
namespace {

// Shared fixture: 1000 articles, stub summaries, default-sized model.
struct World {
  Dataset data;
  ModelConfig model;
  Workbench bench;
  Checkpoint ckpt;
  PreparedDataset prepared;
  RepStore store;

  static World& get() {
    static World w = make();
    return w;
  }

  static World make() {
    SyntheticSpec spec;
    spec.n_articles = 1000;
    spec.n_impressions = 500;
    auto data = generate_synthetic(spec).dataset;
    make_summarizer(SummarizerConfig{})->summarize_corpus(data.corpus);
    ModelConfig m;
    m.text_dim = 256;
    m.proj_dim = 64;
    m.attr_hidden_dim = 64;
    m.attr_out_dim = 32;
    m = complete_schema(m, data.corpus);
    auto bench = Workbench::create(m, SummarizerConfig{});
    auto prepared = bench.prepare(data.corpus, data.impressions);
    Checkpoint ckpt{m, ModelParams::initialize(m, 1), {}, {}};
    auto store = precompute(ckpt, data.corpus, latest_user_histories(data.impressions),
                            *bench.features, *bench.profiles);
    return World{std::move(data), m, std::move(bench), std::move(ckpt),
                 std::move(prepared), std::move(store)};
  }
};

void BM_Rank(benchmark::State& state) {
  auto& w = World::get();
  RankRequest req{"U1", {}, 10};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) req.candidates.push_back(w.prepared.article_ids[i]);
  for (auto _ : state) benchmark::DoNotOptimize(rank(req, w.store, w.ckpt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rank)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_EncodeArticles(benchmark::State& state) {
  auto& w = World::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_articles(w.model, w.ckpt.params, w.prepared.features));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(w.prepared.features.size()));
}
BENCHMARK(BM_EncodeArticles)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  auto& w = World::get();
  auto examples = build_examples(w.prepared, 4, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  examples.resize(std::min(batch, examples.size()));
  auto params = w.ckpt.params;
  auto grads = ModelParams::zeros(w.model);
  auto adam = AdamState::zeros(w.model);
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    batch_gradients(w.model, params, w.prepared, examples, 0.2, &rng, grads, &params);
    adam_step(params, grads, adam, 1e-4);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(examples.size()));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Checkpoint(benchmark::State& state) {
  auto& w = World::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(deserialize_checkpoint(serialize_checkpoint(w.ckpt)));
  }
}
BENCHMARK(BM_Checkpoint)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace viewflow

BENCHMARK_MAIN();
