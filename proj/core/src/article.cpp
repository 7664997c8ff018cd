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

#include "viewflow/article.hpp"

#include <set>

#include "viewflow/error.hpp"

namespace viewflow {

const std::string& Article::category() const {
  static const std::string kEmpty;
  auto it = attributes.find("category");
  return it == attributes.end() ? kEmpty : it->second;
}

Corpus::Corpus(std::vector<Article> articles) {
  articles_.reserve(articles.size());
  for (auto& a : articles) add(std::move(a));
}

void Corpus::add(Article article) {
  if (article.id.empty()) throw DataError("article with empty id");
  if (index_.count(article.id) != 0) {
    throw DataError("duplicate article id: " + article.id);
  }
  index_.emplace(article.id, articles_.size());
  articles_.push_back(std::move(article));
}

const Article* Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &articles_[it->second];
}

const Article& Corpus::at(const std::string& id) const {
  const Article* a = find(id);
  if (a == nullptr) throw DataError("unknown article id: " + id);
  return *a;
}

std::optional<std::size_t> Corpus::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DatasetStats compute_stats(const Dataset& dataset) {
  DatasetStats stats;
  std::set<std::string> users;
  for (const auto& imp : dataset.impressions) {
    users.insert(imp.user_id);
    stats.n_candidates += imp.candidates.size();
    for (const auto& c : imp.candidates) stats.n_positive += c.label;
  }
  stats.n_users = users.size();
  stats.n_articles = dataset.corpus.size();
  stats.n_impressions = dataset.impressions.size();
  return stats;
}

std::vector<std::string> find_dangling_references(const Dataset& dataset) {
  std::vector<std::string> problems;
  for (const auto& imp : dataset.impressions) {
    for (const auto& h : imp.history) {
      if (dataset.corpus.find(h) == nullptr) {
        problems.push_back("impression " + imp.id + ": history id " + h +
                           " not in corpus");
      }
    }
    for (const auto& c : imp.candidates) {
      if (dataset.corpus.find(c.article_id) == nullptr) {
        problems.push_back("impression " + imp.id + ": candidate id " +
                           c.article_id + " not in corpus");
      }
    }
  }
  return problems;
}

}  // namespace viewflow
