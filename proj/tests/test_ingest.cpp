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

#include <fstream>
#include <sstream>

#include "viewflow/error.hpp"
#include "viewflow/ingest.hpp"

namespace viewflow {
namespace {

TEST(MindNews, ParsesDocumentedLine) {
  std::istringstream in("N1\tsports\tsoccer\tTitle A\tAbstract A\thttp://x\t[]\t[]\n");
  auto r = parse_mind_news(in);
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.records.size(), 1u);
  const Article& a = r.records[0];
  EXPECT_EQ(a.id, "N1");
  EXPECT_EQ(a.title, "Title A");
  EXPECT_EQ(a.body, "Abstract A");
  EXPECT_EQ(a.attributes.at("category"), "sports");
  EXPECT_EQ(a.attributes.at("subcategory"), "soccer");
  EXPECT_EQ(a.category(), "sports");
  EXPECT_EQ(a.attributes.size(), 2u);
}

TEST(MindNews, EmptyStreamGivesNothing) {
  std::istringstream in("");
  auto r = parse_mind_news(in);
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(MindNews, ShortLineIsARecordErrorAndParsingContinues) {
  std::istringstream in(
      "N1\tsports\tsoccer\tT1\tB1\n"
      "N2\ttech\tT2\n"
      "N3\tnews\tworld\tT3\tB3\n");
  auto r = parse_mind_news(in);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 2u);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[1].id, "N3");
  // Totals: records = lines - rejected.
  EXPECT_EQ(r.records.size(), r.lines - r.errors.size());
}

TEST(MindNews, DuplicateIdIsRejected) {
  std::istringstream in("N1\ta\tb\tT\tB\nN1\ta\tb\tT2\tB2\n");
  auto r = parse_mind_news(in);
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 2u);
}

TEST(MindBehaviors, ParsesDocumentedLine) {
  std::istringstream in("1\tU1\t11/11/2019 9:05:58 AM\tN10 N11\tN20-1 N21-0\n");
  auto r = parse_mind_behaviors(in);
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.records.size(), 1u);
  const Impression& imp = r.records[0];
  EXPECT_EQ(imp.id, "1");
  EXPECT_EQ(imp.user_id, "U1");
  EXPECT_EQ(imp.history, (std::vector<std::string>{"N10", "N11"}));
  EXPECT_EQ(imp.candidates, (std::vector<Candidate>{{"N20", 1}, {"N21", 0}}));
  EXPECT_EQ(imp.timestamp, parse_mind_time("11/11/2019 9:05:58 AM"));
}

TEST(MindBehaviors, EmptyHistoryIsColdStart) {
  std::istringstream in("2\tU2\t11/11/2019 9:05:58 AM\t\tN20-1\n");
  auto r = parse_mind_behaviors(in);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_TRUE(r.records[0].history.empty());
}

TEST(MindBehaviors, BadLabelSuffixIsAnError) {
  std::istringstream in(
      "1\tU1\t11/11/2019 9:05:58 AM\tN10\tN20-2\n"
      "2\tU1\t11/11/2019 9:05:58 AM\tN10\tN20\n"
      "3\tU1\t11/11/2019 9:05:58 AM\tN10\tN20-0\n");
  auto r = parse_mind_behaviors(in);
  EXPECT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(MindTime, ConvertsToUtcEpochSeconds) {
  // 2019-11-11 09:05:58 UTC.
  EXPECT_EQ(parse_mind_time("11/11/2019 9:05:58 AM"), 1573463158);
  EXPECT_EQ(parse_mind_time("11/11/2019 12:00:00 AM"), 1573430400);
  EXPECT_EQ(parse_mind_time("11/11/2019 12:00:00 PM"), 1573473600);
  EXPECT_THROW(parse_mind_time("yesterday"), DataError);
}

TEST(Jsonl, ParsesArticleAndImpressionRecords) {
  std::istringstream in(
      R"({"kind":"article","id":"a1","title":"t","body":"b","attributes":{"position":"engineer"}})"
      "\n"
      R"({"kind":"impression","id":"i1","user":"u1","timestamp":0,"history":[],"candidates":[["a1",1]]})"
      "\n");
  auto r = parse_jsonl(in);
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.articles.records.size(), 1u);
  EXPECT_EQ(r.articles.records[0].attributes.at("position"), "engineer");
  ASSERT_EQ(r.impressions.records.size(), 1u);
  EXPECT_EQ(r.impressions.records[0].candidates, (std::vector<Candidate>{{"a1", 1}}));
}

TEST(Jsonl, UnknownKindIsAnError) {
  std::istringstream in(R"({"kind":"x"})" "\n");
  auto r = parse_jsonl(in);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 1u);
}

TEST(Jsonl, RoundTripIsNormalizing) {
  // Key order and spacing differ from the canonical writer's output.
  std::string raw =
      R"({"title":"t", "kind":"article","id":"a1","body":"b","summary":"s","attributes":{"z":"1","a":"2"}})"
      "\n"
      R"({"candidates":[["a1",0]],"kind":"impression","id":"i1","user":"u1","timestamp":5,"history":["a1"]})"
      "\n";
  std::istringstream in(raw);
  auto r = parse_jsonl(in);
  ASSERT_TRUE(r.errors.empty());
  Dataset d;
  d.corpus = Corpus(r.articles.records);
  d.impressions = r.impressions.records;
  std::ostringstream once;
  write_jsonl(once, d);

  std::istringstream in2(once.str());
  auto r2 = parse_jsonl(in2);
  Dataset d2;
  d2.corpus = Corpus(r2.articles.records);
  d2.impressions = r2.impressions.records;
  std::ostringstream twice;
  write_jsonl(twice, d2);
  EXPECT_EQ(once.str(), twice.str());
  EXPECT_EQ(d2.corpus.articles(), d.corpus.articles());
  EXPECT_EQ(d2.impressions, d.impressions);
}

TEST(Dataset, DanglingReferencesAreReported) {
  Dataset d;
  d.corpus.add(Article{"a1", "t", "b", std::nullopt, {}});
  d.impressions.push_back(Impression{"i1", "u1", 0, {"a9"}, {{"a1", 1}, {"a8", 0}}});
  EXPECT_EQ(find_dangling_references(d).size(), 2u);
}

TEST(Corpus, RejectsEmptyAndDuplicateIds) {
  Corpus c;
  c.add(Article{"a1", "t", "", std::nullopt, {}});
  EXPECT_THROW(c.add(Article{"a1", "t", "", std::nullopt, {}}), DataError);
  EXPECT_THROW(c.add(Article{"", "t", "", std::nullopt, {}}), DataError);
}

TEST(Subsample, KeepsRequestedUserCountDeterministically) {
  Dataset d;
  d.corpus.add(Article{"a1", "t", "b", std::nullopt, {}});
  for (int i = 0; i < 20; ++i) {
    d.impressions.push_back(
        Impression{"i" + std::to_string(i), "u" + std::to_string(i % 10), i, {}, {{"a1", 1}}});
  }
  auto s1 = subsample_users(d, 3, 42);
  auto s2 = subsample_users(d, 3, 42);
  EXPECT_EQ(s1.impressions, s2.impressions);
  EXPECT_EQ(compute_stats(s1).n_users, 3u);
  EXPECT_EQ(s1.impressions.size(), 6u);
}

TEST(Split, LatestFractionByTimestamp) {
  std::vector<Impression> imps;
  for (int i = 0; i < 20; ++i) {
    imps.push_back(Impression{"i" + std::to_string(i), "u", 100 - i, {}, {}});
  }
  auto [train, val] = split_by_time(imps, 0.05);
  ASSERT_EQ(val.size(), 1u);
  EXPECT_EQ(val[0].id, "i0");  // largest timestamp
  EXPECT_EQ(train.size(), 19u);
}

TEST(MindFixture, FilesParseCleanly) {
  std::ifstream news(VIEWFLOW_FIXTURES "/mind_news.tsv");
  std::ifstream beh(VIEWFLOW_FIXTURES "/mind_behaviors.tsv");
  auto a = parse_mind_news(news);
  auto b = parse_mind_behaviors(beh);
  EXPECT_TRUE(a.errors.empty());
  EXPECT_TRUE(b.errors.empty());
  EXPECT_EQ(a.records.size(), 3u);
  EXPECT_EQ(b.records.size(), 2u);
}

}  // namespace
}  // namespace viewflow
