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

#include "viewflow/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace viewflow::text {

namespace {

constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",  "after",  "again",  "against", "all",
    "am",      "an",      "and",    "any",    "are",    "as",      "at",
    "be",      "because", "been",   "before", "being",  "below",   "between",
    "both",    "but",     "by",     "can",    "could",  "did",     "do",
    "does",    "doing",   "down",   "during", "each",   "few",     "for",
    "from",    "further", "had",    "has",    "have",   "having",  "he",
    "her",     "here",    "hers",   "herself", "him",   "himself", "his",
    "how",     "i",       "if",     "in",     "into",   "is",      "it",
    "its",     "itself",  "just",   "me",     "more",   "most",    "my",
    "myself",  "no",      "nor",    "not",    "now",    "of",      "off",
    "on",      "once",    "only",   "or",     "other",  "our",     "ours",
    "out",     "over",    "own",    "s",      "same",   "she",     "should",
    "so",      "some",    "such",   "t",      "than",   "that",    "the",
    "their",   "theirs",  "them",   "then",   "there",  "these",   "they",
    "this",    "those",   "through", "to",    "too",    "under",   "until",
    "up",      "very",    "was",    "we",     "were",   "what",    "when",
    "where",   "which",   "while",  "who",    "whom",   "why",     "will",
    "with",    "would",   "you",    "your",   "yours",  "yourself", "new",
    "also"};

bool is_token_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view token) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), token) !=
         std::end(kStopwords);
}

std::vector<std::string> content_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
  return tokens;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : text) {
    bool space = is_space(static_cast<unsigned char>(ch));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string truncate_words(std::string_view text, std::size_t max_words) {
  std::string out;
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size() && n < max_words) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (!out.empty()) out.push_back(' ');
    out.append(text.substr(start, i - start));
    ++n;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool at_end = i + 1 == text.size();
    if (at_end || is_space(static_cast<unsigned char>(text[i + 1]))) {
      auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.push_back(std::move(s));
      start = i + 1;
    }
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace viewflow::text
