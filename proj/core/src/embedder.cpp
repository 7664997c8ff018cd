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

#include "viewflow/embedder.hpp"

#include <fstream>

#include "viewflow/text.hpp"

namespace viewflow {

HashedEmbedder::HashedEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

Vec HashedEmbedder::embed(std::string_view /*key*/, std::string_view text) const {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& tok : text::content_tokens(text)) {
    std::uint64_t h = text::fnv1a64(tok);
    auto bucket = static_cast<Eigen::Index>(h % dim_);
    v[bucket] += ((h >> 32) & 1U) != 0 ? -1.0 : 1.0;
  }
  double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

PrecomputedEmbedder::PrecomputedEmbedder(
    std::size_t dim, std::unordered_map<std::string, Vec> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  for (const auto& [k, v] : vectors_) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw DataError("precomputed vector " + k + " has wrong dimension");
    }
  }
}

PrecomputedEmbedder PrecomputedEmbedder::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open embedding file " + path);
  auto count = binio::read_le<std::uint64_t>(in);
  auto dim = binio::read_le<std::uint32_t>(in);
  if (dim == 0) throw DataError(path + ": zero embedding dimension");
  std::unordered_map<std::string, Vec> vectors;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = binio::read_string(in, 1u << 20);
    Vec v(dim);
    for (std::uint32_t d = 0; d < dim; ++d) {
      v[d] = static_cast<double>(binio::read_le<float>(in));
    }
    if (!vectors.emplace(std::move(id), std::move(v)).second) {
      throw DataError(path + ": duplicate embedding id");
    }
  }
  return PrecomputedEmbedder(dim, std::move(vectors));
}

Vec PrecomputedEmbedder::embed(std::string_view key,
                               std::string_view /*text*/) const {
  auto it = vectors_.find(std::string(key));
  if (it == vectors_.end()) {
    throw DataError("no precomputed embedding for id " + std::string(key));
  }
  return it->second;
}

void save_precomputed_embeddings(
    const std::string& path, std::size_t dim,
    const std::vector<std::pair<std::string, Vec>>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  binio::write_le<std::uint64_t>(out, records.size());
  binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  for (const auto& [id, v] : records) {
    if (static_cast<std::size_t>(v.size()) != dim) {
      throw DataError("embedding " + id + " has wrong dimension");
    }
    binio::write_string(out, id);
    for (Eigen::Index d = 0; d < v.size(); ++d) {
      binio::write_le<float>(out, static_cast<float>(v[d]));
    }
  }
}

std::string title_key(const std::string& article_id) {
  return article_id + "/title";
}
std::string body_key(const std::string& article_id) {
  return article_id + "/body";
}
std::string profile_key(const std::string& profile_id) {
  return "profile/" + profile_id;
}

}  // namespace viewflow
