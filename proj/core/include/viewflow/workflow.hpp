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

#include <memory>
#include <span>

#include "viewflow/config.hpp"
#include "viewflow/encoder.hpp"
#include "viewflow/pipeline.hpp"

namespace viewflow {

// Frozen embedder, feature builder and profile source for one model
// config. The summarizer is only built when profiles are prompted.
struct Workbench {
  ModelConfig model;
  std::shared_ptr<const TextEmbedder> embedder;
  std::shared_ptr<FeatureBuilder> features;
  std::shared_ptr<Summarizer> summarizer;
  std::shared_ptr<ProfileProvider> profiles;

  static Workbench create(const ModelConfig& model, const SummarizerConfig& summarizer,
                          UserAttributes user_attributes = {});

  PreparedDataset prepare(const Corpus& corpus, std::span<const Impression> impressions);
};

// Fills in the attribute schema from the corpus when the config declares
// attribute names without vocabularies, or none at all.
ModelConfig complete_schema(ModelConfig model, const Corpus& corpus);

}  // namespace viewflow
