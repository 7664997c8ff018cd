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

#include "viewflow/model_config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "viewflow/error.hpp"

namespace viewflow {

using nlohmann::json;

std::string AttributeSpec::token_for(
    const std::map<std::string, std::string>& attrs) const {
  auto it = attrs.find(name);
  if (it == attrs.end()) return {};
  if (bucket_edges.empty()) return it->second;
  const std::string& raw = it->second;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size()) return {};
  auto bucket = std::upper_bound(bucket_edges.begin(), bucket_edges.end(), value) -
                bucket_edges.begin();
  return "b" + std::to_string(bucket);
}

int AttributeSpec::index_of(const std::string& token) const {
  if (token.empty()) return 0;
  auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
  if (it == vocab.end() || *it != token) return 0;
  return static_cast<int>(it - vocab.begin()) + 1;
}

void ModelConfig::validate() const {
  if (text_dim == 0 || proj_dim == 0 || attr_out_dim == 0 ||
      attr_hidden_dim == 0 || attr_embed_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (!flags.instant_flow && !flags.constant_flow) {
    throw ConfigError("at least one of instant_flow / constant_flow must be on");
  }
  if (embedder.kind != "hashed" && embedder.kind != "precomputed") {
    throw ConfigError("unknown embedder kind: " + embedder.kind);
  }
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty() || !names.insert(a.name).second) {
      throw ConfigError("attribute names must be unique and non-empty");
    }
    if (!std::is_sorted(a.bucket_edges.begin(), a.bucket_edges.end())) {
      throw ConfigError("bucket edges of " + a.name + " must be sorted");
    }
    if (std::adjacent_find(a.vocab.begin(), a.vocab.end(),
                           std::greater_equal<>()) != a.vocab.end()) {
      throw ConfigError("vocabulary of " + a.name + " must be sorted and unique");
    }
  }
}

json ModelConfig::to_json() const {
  json attrs = json::array();
  for (const auto& a : attributes) {
    attrs.push_back(
        {{"name", a.name}, {"bucket_edges", a.bucket_edges}, {"vocab", a.vocab}});
  }
  return {
      {"text_dim", text_dim},
      {"proj_dim", proj_dim},
      {"attr_embed_dim", attr_embed_dim},
      {"attr_hidden_dim", attr_hidden_dim},
      {"attr_out_dim", attr_out_dim},
      {"batch_norm", batch_norm},
      {"max_history", max_history},
      {"bn_momentum", bn_momentum},
      {"bn_eps", bn_eps},
      {"flags",
       {{"instant_flow", flags.instant_flow},
        {"constant_flow", flags.constant_flow},
        {"flow_gate", flags.flow_gate},
        {"use_instruct_u", flags.use_instruct_u},
        {"use_summaries", flags.use_summaries}}},
      {"embedder", {{"kind", embedder.kind}, {"path", embedder.path}}},
      {"attributes", attrs},
  };
}

namespace {

// Reads `key` into `out` when present. Keys outside `allowed` are errors.
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key " + where + "." + key);
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  try {
    check_keys(j, "model",
               {"text_dim", "proj_dim", "attr_embed_dim", "attr_hidden_dim",
                "attr_out_dim", "batch_norm", "max_history", "bn_momentum", "bn_eps",
                "flags", "embedder", "attributes"});
    read_opt(j, "text_dim", c.text_dim);
    read_opt(j, "proj_dim", c.proj_dim);
    read_opt(j, "attr_embed_dim", c.attr_embed_dim);
    read_opt(j, "attr_hidden_dim", c.attr_hidden_dim);
    read_opt(j, "attr_out_dim", c.attr_out_dim);
    read_opt(j, "batch_norm", c.batch_norm);
    read_opt(j, "max_history", c.max_history);
    read_opt(j, "bn_momentum", c.bn_momentum);
    read_opt(j, "bn_eps", c.bn_eps);
    if (j.contains("flags")) {
      const auto& f = j.at("flags");
      check_keys(f, "model.flags",
                 {"instant_flow", "constant_flow", "flow_gate", "use_instruct_u",
                  "use_summaries"});
      read_opt(f, "instant_flow", c.flags.instant_flow);
      read_opt(f, "constant_flow", c.flags.constant_flow);
      read_opt(f, "flow_gate", c.flags.flow_gate);
      read_opt(f, "use_instruct_u", c.flags.use_instruct_u);
      read_opt(f, "use_summaries", c.flags.use_summaries);
    }
    if (j.contains("embedder")) {
      const auto& e = j.at("embedder");
      check_keys(e, "model.embedder", {"kind", "path"});
      read_opt(e, "kind", c.embedder.kind);
      read_opt(e, "path", c.embedder.path);
    }
    if (j.contains("attributes")) {
      for (const auto& a : j.at("attributes")) {
        check_keys(a, "model.attributes[]", {"name", "bucket_edges", "vocab"});
        AttributeSpec spec;
        spec.name = a.at("name").get<std::string>();
        read_opt(a, "bucket_edges", spec.bucket_edges);
        read_opt(a, "vocab", spec.vocab);
        c.attributes.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<AttributeSpec> build_attribute_schema(
    const Corpus& corpus, const std::vector<AttributeSpec>& declared) {
  std::vector<AttributeSpec> specs;
  if (declared.empty()) {
    std::set<std::string> names;
    for (const auto& a : corpus.articles()) {
      for (const auto& [k, v] : a.attributes) names.insert(k);
    }
    for (const auto& n : names) specs.push_back(AttributeSpec{n, {}, {}});
  } else {
    for (const auto& d : declared) {
      specs.push_back(AttributeSpec{d.name, d.bucket_edges, {}});
    }
  }
  for (auto& spec : specs) {
    std::set<std::string> tokens;
    for (const auto& a : corpus.articles()) {
      auto tok = spec.token_for(a.attributes);
      if (!tok.empty()) tokens.insert(tok);
    }
    spec.vocab.assign(tokens.begin(), tokens.end());
  }
  return specs;
}

}  // namespace viewflow
