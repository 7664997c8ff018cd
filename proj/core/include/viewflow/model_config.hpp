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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "viewflow/article.hpp"

namespace viewflow {

// Ablation switches. All on is the full model.
struct AblationFlags {
  bool instant_flow = true;
  bool constant_flow = true;
  bool flow_gate = true;
  bool use_instruct_u = true;
  bool use_summaries = true;

  bool operator==(const AblationFlags&) const = default;
};

// One categorical attribute. When bucket_edges is non-empty the raw value
// is parsed as a number and mapped to "b<i>", i = #edges <= value.
struct AttributeSpec {
  std::string name;
  std::vector<double> bucket_edges;
  // Sorted. Index 0 is reserved for unknown tokens; vocab[i] has index
  // i + 1.
  std::vector<std::string> vocab;

  std::string token_for(const std::map<std::string, std::string>& attrs) const;
  int index_of(const std::string& token) const;
  std::size_t table_rows() const { return vocab.size() + 1; }

  bool operator==(const AttributeSpec&) const = default;
};

struct EmbedderSpec {
  std::string kind = "hashed";  // hashed | precomputed
  std::string path;             // precomputed only

  bool operator==(const EmbedderSpec&) const = default;
};

struct ModelConfig {
  std::size_t text_dim = 256;         // E, frozen embedder output
  std::size_t proj_dim = 128;         // P, title/body projections
  std::size_t attr_embed_dim = 16;    // per-attribute embedding width
  std::size_t attr_hidden_dim = 64;   // attribute MLP hidden layer
  std::size_t attr_out_dim = 64;      // A
  bool batch_norm = true;
  // Most recent history items the model reads; 0 keeps all.
  std::size_t max_history = 50;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
  AblationFlags flags;
  EmbedderSpec embedder;
  std::vector<AttributeSpec> attributes;

  std::size_t article_dim() const { return attr_out_dim + 2 * proj_dim; }
  std::size_t user_dim() const {
    return (flags.instant_flow ? article_dim() : 0) +
           (flags.constant_flow ? article_dim() : 0);
  }
  std::size_t head_dim() const { return user_dim() + article_dim(); }

  // Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Fills each attribute's vocabulary from the corpus (sorted, deduplicated).
// Attribute names not listed in `names` are ignored. An empty `names` means
// every attribute key seen in the corpus.
std::vector<AttributeSpec> build_attribute_schema(
    const Corpus& corpus, const std::vector<AttributeSpec>& declared);

}  // namespace viewflow
