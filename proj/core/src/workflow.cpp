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

#include "viewflow/workflow.hpp"

#include <algorithm>

namespace viewflow {

Workbench Workbench::create(const ModelConfig& model,
                            const SummarizerConfig& summarizer,
                            UserAttributes user_attributes) {
  Workbench w;
  w.model = model;
  w.embedder = make_embedder(model);
  w.features = std::make_shared<FeatureBuilder>(model, w.embedder);
  if (model.flags.use_instruct_u) w.summarizer = make_summarizer(summarizer);
  w.profiles = std::make_shared<ProfileProvider>(w.summarizer, model.flags.use_instruct_u,
                                                 std::move(user_attributes));
  return w;
}

PreparedDataset Workbench::prepare(const Corpus& corpus,
                                   std::span<const Impression> impressions) {
  return prepare_dataset(corpus, impressions, *features, *profiles);
}

ModelConfig complete_schema(ModelConfig model, const Corpus& corpus) {
  const bool incomplete =
      model.attributes.empty() ||
      std::any_of(model.attributes.begin(), model.attributes.end(),
                  [](const AttributeSpec& a) { return a.vocab.empty(); });
  if (incomplete) model.attributes = build_attribute_schema(corpus, model.attributes);
  return model;
}

}  // namespace viewflow
