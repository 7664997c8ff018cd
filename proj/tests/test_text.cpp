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

#include <gtest/gtest.h>

#include "viewflow/text.hpp"

namespace viewflow::text {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Rust, compiler-NOTES!"),
            (std::vector<std::string>{"rust", "compiler", "notes"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" .,; ").empty());
}

TEST(Tokenize, KeepsNonAsciiBytesInsideTokens) {
  auto toks = tokenize("caf\xc3\xa9 bar");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0], "caf\xc3\xa9");
}

TEST(ContentTokens, DropsStopwords) {
  EXPECT_EQ(content_tokens("The state of the art"),
            (std::vector<std::string>{"state", "art"}));
  EXPECT_TRUE(is_stopword("the"));
  EXPECT_FALSE(is_stopword("compiler"));
}

TEST(Words, CountAndTruncate) {
  EXPECT_EQ(count_words("  one two\tthree\n"), 3u);
  EXPECT_EQ(count_words(""), 0u);
  EXPECT_EQ(truncate_words("a  b c d", 2), "a b");
  EXPECT_EQ(truncate_words("a b", 5), "a b");
}

TEST(Sentences, SplitKeepsTerminators) {
  EXPECT_EQ(split_sentences("One. Two!  Three? four"),
            (std::vector<std::string>{"One.", "Two!", "Three?", "four"}));
  EXPECT_EQ(split_sentences("v1.2 is out."), (std::vector<std::string>{"v1.2 is out."}));
}

TEST(Trim, StripsWhitespace) { EXPECT_EQ(trim(" \t x y \n"), "x y"); }

// Published FNV-1a 64-bit test vectors.
TEST(Fnv1a64, MatchesReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Sha256, MatchesReferenceVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace viewflow::text
