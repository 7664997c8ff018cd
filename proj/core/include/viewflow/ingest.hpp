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
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "viewflow/article.hpp"

namespace viewflow {

// A rejected input record. Parsing continues past it.
struct RecordError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<RecordError> errors;
  std::size_t lines = 0;  // non-blank lines seen
};

// MIND news.tsv: id, category, subcategory, title, abstract, url,
// title entities, abstract entities. The abstract becomes the body;
// category/subcategory become attributes. url and entity columns are
// ignored.
ParseResult<Article> parse_mind_news(std::istream& in);

// MIND behaviors.tsv: impression id, user id, time, history, impressions
// ("N123-1 N456-0").
ParseResult<Impression> parse_mind_behaviors(std::istream& in);

// "11/11/2019 9:05:58 AM" interpreted as UTC. Throws DataError.
std::int64_t parse_mind_time(const std::string& text);

struct JsonlResult {
  ParseResult<Article> articles;
  ParseResult<Impression> impressions;
  std::vector<RecordError> errors;  // record-level errors of either kind
  std::size_t lines = 0;
};

// Canonical interchange format: one JSON object per line with
// "kind":"article" or "kind":"impression".
JsonlResult parse_jsonl(std::istream& in);

// Writes articles first (corpus order) then impressions (input order).
// Output is byte-stable for equal datasets.
void write_jsonl(std::ostream& out, const Dataset& dataset);

// Loads a JSONL file, throwing DataError when any record is rejected or any
// reference dangles.
Dataset load_jsonl_file(const std::string& path);
void save_jsonl_file(const std::string& path, const Dataset& dataset);

// Keeps the impressions of `n_users` users drawn with a seeded shuffle of
// the sorted user list. The corpus is kept whole.
Dataset subsample_users(const Dataset& dataset, std::size_t n_users,
                        std::uint64_t seed);

// Last `fraction` of impressions by timestamp (ties broken by input order)
// go to the second half of the pair.
std::pair<std::vector<Impression>, std::vector<Impression>> split_by_time(
    const std::vector<Impression>& impressions, double fraction);

}  // namespace viewflow
