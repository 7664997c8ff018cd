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
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace viewflow {

struct Article {
  std::string id;
  std::string title;
  std::string body;
  std::optional<std::string> summary;
  // Categorical attributes keyed by attribute name. MIND category and
  // subcategory land here; ATA-style records carry author attributes.
  std::map<std::string, std::string> attributes;

  // The category attribute, or empty when the article has none.
  const std::string& category() const;

  bool operator==(const Article&) const = default;
};

struct Candidate {
  std::string article_id;
  int label = 0;

  bool operator==(const Candidate&) const = default;
};

struct Impression {
  std::string id;
  std::string user_id;
  std::int64_t timestamp = 0;
  // Oldest first.
  std::vector<std::string> history;
  std::vector<Candidate> candidates;

  bool operator==(const Impression&) const = default;
};

// Articles indexed by id. Insertion order is preserved so serialized output
// is stable.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Article> articles);

  // Throws DataError on an empty or duplicate id.
  void add(Article article);

  const Article* find(const std::string& id) const;
  const Article& at(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;

  const std::vector<Article>& articles() const { return articles_; }
  std::vector<Article>& mutable_articles() { return articles_; }
  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }

 private:
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Dataset {
  Corpus corpus;
  std::vector<Impression> impressions;
};

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_articles = 0;
  std::size_t n_impressions = 0;
  std::size_t n_candidates = 0;
  std::size_t n_positive = 0;
};

DatasetStats compute_stats(const Dataset& dataset);

// Verifies every history and candidate id resolves against the corpus.
// Returns one message per dangling reference.
std::vector<std::string> find_dangling_references(const Dataset& dataset);

}  // namespace viewflow
