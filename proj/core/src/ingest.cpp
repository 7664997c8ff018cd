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

#include "viewflow/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "viewflow/error.hpp"
#include "viewflow/text.hpp"

namespace viewflow {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Reads lines, stripping a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

Candidate parse_candidate_token(const std::string& tok) {
  auto dash = tok.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 2 != tok.size()) {
    throw DataError("candidate token without -0/-1 suffix: " + tok);
  }
  char l = tok.back();
  if (l != '0' && l != '1') {
    throw DataError("candidate label must be 0 or 1: " + tok);
  }
  return Candidate{tok.substr(0, dash), l - '0'};
}

int parse_int_strict(const std::string& s, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
    throw DataError(std::string("bad ") + what + ": " + s);
  }
  return std::stoi(s);
}

Article article_from_json(const json& j) {
  Article a;
  a.id = j.at("id").get<std::string>();
  a.title = j.at("title").get<std::string>();
  a.body = j.value("body", std::string());
  if (j.contains("summary") && !j.at("summary").is_null()) {
    a.summary = j.at("summary").get<std::string>();
  }
  if (j.contains("attributes")) {
    for (const auto& [k, v] : j.at("attributes").items()) {
      a.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  if (a.id.empty()) throw DataError("article with empty id");
  if (a.title.empty()) throw DataError("article " + a.id + " has empty title");
  return a;
}

Impression impression_from_json(const json& j) {
  Impression imp;
  imp.id = j.at("id").get<std::string>();
  imp.user_id = j.at("user").get<std::string>();
  imp.timestamp = j.value("timestamp", std::int64_t{0});
  imp.history = j.value("history", std::vector<std::string>{});
  for (const auto& c : j.at("candidates")) {
    Candidate cand;
    if (c.is_array()) {
      if (c.size() != 2) throw DataError("candidate must be [id, label]");
      cand.article_id = c.at(0).get<std::string>();
      cand.label = c.at(1).get<int>();
    } else {
      cand.article_id = c.at("id").get<std::string>();
      cand.label = c.at("label").get<int>();
    }
    if (cand.label != 0 && cand.label != 1) {
      throw DataError("candidate label must be 0 or 1 in impression " + imp.id);
    }
    imp.candidates.push_back(std::move(cand));
  }
  return imp;
}

json to_json(const Article& a) {
  json j;
  j["kind"] = "article";
  j["id"] = a.id;
  j["title"] = a.title;
  j["body"] = a.body;
  j["attributes"] = a.attributes;
  if (a.summary) j["summary"] = *a.summary;
  return j;
}

json to_json(const Impression& imp) {
  json j;
  j["kind"] = "impression";
  j["id"] = imp.id;
  j["user"] = imp.user_id;
  j["timestamp"] = imp.timestamp;
  j["history"] = imp.history;
  json cands = json::array();
  for (const auto& c : imp.candidates) cands.push_back({c.article_id, c.label});
  j["candidates"] = std::move(cands);
  return j;
}

}  // namespace

ParseResult<Article> parse_mind_news(std::istream& in) {
  ParseResult<Article> result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    ++result.lines;
    auto fields = split(line, '\t');
    if (fields.size() < 5) {
      result.errors.push_back(
          {lineno, "expected at least 5 tab-separated fields, got " +
                       std::to_string(fields.size())});
      continue;
    }
    Article a;
    a.id = fields[0];
    a.title = fields[3];
    a.body = fields[4];
    if (!fields[1].empty()) a.attributes["category"] = fields[1];
    if (!fields[2].empty()) a.attributes["subcategory"] = fields[2];
    if (a.id.empty()) {
      result.errors.push_back({lineno, "empty article id"});
      continue;
    }
    if (a.title.empty()) {
      result.errors.push_back({lineno, "empty title for " + a.id});
      continue;
    }
    if (!seen.insert(a.id).second) {
      result.errors.push_back({lineno, "duplicate article id " + a.id});
      continue;
    }
    result.records.push_back(std::move(a));
  }
  return result;
}

std::int64_t parse_mind_time(const std::string& text) {
  // M/D/YYYY h:mm:ss AM
  auto parts = split_ws(text);
  if (parts.size() != 3) throw DataError("bad MIND time: " + text);
  auto date = split(parts[0], '/');
  auto clock = split(parts[1], ':');
  if (date.size() != 3 || clock.size() != 3) {
    throw DataError("bad MIND time: " + text);
  }
  int month = parse_int_strict(date[0], "month");
  int day = parse_int_strict(date[1], "day");
  int year = parse_int_strict(date[2], "year");
  int hour = parse_int_strict(clock[0], "hour");
  int minute = parse_int_strict(clock[1], "minute");
  int second = parse_int_strict(clock[2], "second");
  const std::string& ampm = parts[2];
  if (hour < 1 || hour > 12 || minute > 59 || second > 60) {
    throw DataError("bad MIND time: " + text);
  }
  if (ampm == "AM") {
    if (hour == 12) hour = 0;
  } else if (ampm == "PM") {
    if (hour != 12) hour += 12;
  } else {
    throw DataError("bad MIND time: " + text);
  }
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                     std::chrono::day{unsigned(day)}};
  if (!ymd.ok()) throw DataError("bad MIND date: " + text);
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 +
         second;
}

ParseResult<Impression> parse_mind_behaviors(std::istream& in) {
  ParseResult<Impression> result;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    ++result.lines;
    auto fields = split(line, '\t');
    if (fields.size() < 5) {
      result.errors.push_back(
          {lineno, "expected 5 tab-separated fields, got " +
                       std::to_string(fields.size())});
      continue;
    }
    try {
      Impression imp;
      imp.id = fields[0];
      imp.user_id = fields[1];
      if (imp.id.empty() || imp.user_id.empty()) {
        throw DataError("empty impression or user id");
      }
      imp.timestamp = parse_mind_time(fields[2]);
      imp.history = split_ws(fields[3]);
      for (const auto& tok : split_ws(fields[4])) {
        imp.candidates.push_back(parse_candidate_token(tok));
      }
      if (imp.candidates.empty()) throw DataError("impression has no candidates");
      result.records.push_back(std::move(imp));
    } catch (const DataError& e) {
      result.errors.push_back({lineno, e.what()});
    }
  }
  return result;
}

JsonlResult parse_jsonl(std::istream& in) {
  JsonlResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    ++result.lines;
    try {
      json j = json::parse(line);
      std::string kind = j.value("kind", std::string());
      if (kind == "article") {
        ++result.articles.lines;
        Article a = article_from_json(j);
        if (!seen.insert(a.id).second) {
          throw DataError("duplicate article id " + a.id);
        }
        result.articles.records.push_back(std::move(a));
      } else if (kind == "impression") {
        ++result.impressions.lines;
        result.impressions.records.push_back(impression_from_json(j));
      } else {
        throw DataError("unknown record kind '" + kind + "'");
      }
    } catch (const DataError& e) {
      result.errors.push_back({lineno, e.what()});
    } catch (const json::exception& e) {
      result.errors.push_back({lineno, e.what()});
    }
  }
  return result;
}

void write_jsonl(std::ostream& out, const Dataset& dataset) {
  for (const auto& a : dataset.corpus.articles()) out << to_json(a).dump() << '\n';
  for (const auto& imp : dataset.impressions) out << to_json(imp).dump() << '\n';
}

Dataset load_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file " + path);
  auto parsed = parse_jsonl(in);
  if (!parsed.errors.empty()) {
    const auto& e = parsed.errors.front();
    throw DataError(path + ":" + std::to_string(e.line) + ": " + e.message +
                    " (" + std::to_string(parsed.errors.size()) +
                    " rejected records)");
  }
  Dataset ds;
  ds.corpus = Corpus(std::move(parsed.articles.records));
  ds.impressions = std::move(parsed.impressions.records);
  auto dangling = find_dangling_references(ds);
  if (!dangling.empty()) {
    throw DataError(path + ": " + dangling.front() + " (" +
                    std::to_string(dangling.size()) + " dangling references)");
  }
  return ds;
}

void save_jsonl_file(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  write_jsonl(out, dataset);
  if (!out) throw RuntimeFailure("write failed: " + path);
}

Dataset subsample_users(const Dataset& dataset, std::size_t n_users,
                        std::uint64_t seed) {
  std::set<std::string> users_set;
  for (const auto& imp : dataset.impressions) users_set.insert(imp.user_id);
  std::vector<std::string> users(users_set.begin(), users_set.end());
  std::mt19937_64 rng(seed);
  std::shuffle(users.begin(), users.end(), rng);
  if (users.size() > n_users) users.resize(n_users);
  std::unordered_set<std::string> keep(users.begin(), users.end());

  Dataset out;
  out.corpus = dataset.corpus;
  for (const auto& imp : dataset.impressions) {
    if (keep.count(imp.user_id) != 0) out.impressions.push_back(imp);
  }
  return out;
}

std::pair<std::vector<Impression>, std::vector<Impression>> split_by_time(
    const std::vector<Impression>& impressions, double fraction) {
  std::vector<std::size_t> order(impressions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return impressions[a].timestamp < impressions[b].timestamp;
  });
  auto n_tail = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(impressions.size())));
  n_tail = std::min(n_tail, impressions.size());
  std::size_t n_head = impressions.size() - n_tail;
  std::pair<std::vector<Impression>, std::vector<Impression>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_head ? out.first : out.second).push_back(impressions[order[i]]);
  }
  return out;
}

}  // namespace viewflow
