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
#include <string>
#include <string_view>
#include <vector>

namespace viewflow::text {

// Lowercased word tokens. A token is a maximal run of ASCII letters, digits
// or non-ASCII bytes, so UTF-8 text survives as opaque tokens.
std::vector<std::string> tokenize(std::string_view text);

// tokenize() with stopwords removed.
std::vector<std::string> content_tokens(std::string_view text);

bool is_stopword(std::string_view token);

// Number of whitespace-separated words. This is the unit for summary length
// budgets.
std::size_t count_words(std::string_view text);

// First `max_words` whitespace-separated words of `text`, joined by single
// spaces.
std::string truncate_words(std::string_view text, std::size_t max_words);

// Splits on '.', '!' or '?' followed by whitespace or end of text. Sentence
// terminators are kept; surrounding whitespace is trimmed.
std::vector<std::string> split_sentences(std::string_view text);

std::string trim(std::string_view s);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace viewflow::text
