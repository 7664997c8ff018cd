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
#include <string>
#include <string_view>
#include <unordered_map>

#include "viewflow/tensor_io.hpp"

namespace viewflow {

// Frozen text encoder. Implementations never change during training and
// return the same vector for the same input.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;

  // `key` identifies the text for lookup-based backends (e.g. "A12/title");
  // `text` is the content for computed backends.
  virtual Vec embed(std::string_view key, std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
};

// Signed feature hashing of lowercased non-stopword tokens, L2-normalized.
// Token t adds sign(t) to bucket fnv1a64(t) mod dim, where the sign is -1
// when bit 32 of the hash is set. Empty or stopword-only text maps to the
// zero vector.
class HashedEmbedder : public TextEmbedder {
 public:
  explicit HashedEmbedder(std::size_t dim);
  Vec embed(std::string_view key, std::string_view text) const override;
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "hashed"; }

 private:
  std::size_t dim_;
};

// Vectors produced offline by any sentence encoder, looked up by key.
//
// File layout (little-endian):
//   u64 count, u32 dim, then `count` records of
//   u32 id length, id bytes, float32[dim].
class PrecomputedEmbedder : public TextEmbedder {
 public:
  PrecomputedEmbedder(std::size_t dim,
                      std::unordered_map<std::string, Vec> vectors);
  static PrecomputedEmbedder load(const std::string& path);

  // Throws DataError for an unknown key.
  Vec embed(std::string_view key, std::string_view text) const override;
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "precomputed"; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Vec> vectors_;
};

void save_precomputed_embeddings(
    const std::string& path, std::size_t dim,
    const std::vector<std::pair<std::string, Vec>>& records);

// Keys used for article texts and user profiles.
std::string title_key(const std::string& article_id);
std::string body_key(const std::string& article_id);
std::string profile_key(const std::string& profile_id);

}  // namespace viewflow
