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

#include "viewflow/summarizer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "viewflow/error.hpp"
#include "viewflow/text.hpp"

namespace viewflow {

using nlohmann::json;

namespace {

struct TemplateEntry {
  TemplateName name;
  const char* id;
  const char* text;
};

constexpr TemplateEntry kTemplates[] = {
    {TemplateName::kArticleSummaryMind, "article_summary_mind",
     "This is an article about [category], please summarize it in a short "
     "sentence by piquing the reader's interest: [article_body]"},
    {TemplateName::kUserProfileMind, "user_profile_mind",
     "Please summarize the user's news browsing content. Here is the "
     "browsing history: [visited_articles]"},
    {TemplateName::kArticleSummaryAta, "article_summary_ata",
     "Given an article, the title is [article_title] and the article content "
     "is [article_body], please generate a 200-word summarization according "
     "to the article."},
    {TemplateName::kUserProfileAta, "user_profile_ata",
     "Given the visited articles: [visited_articles], I am a [position] from "
     "[organization], and my skills are [skill]. Please write a summary of "
     "about 150 words based on the visited articles."},
};

const TemplateEntry& entry(TemplateName name) {
  for (const auto& e : kTemplates) {
    if (e.name == name) return e;
  }
  throw ConfigError("unknown template");
}

bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

std::string stub_profile(std::span<const Article* const> history,
                         std::size_t n_terms) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const Article* a : history) {
    for (auto& tok : text::content_tokens(a->title)) {
      if (counts[tok]++ == 0) order.push_back(tok);
    }
  }
  // Most frequent first; first appearance breaks ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& x, const std::string& y) {
                     return counts[x] > counts[y];
                   });
  if (order.size() > n_terms) order.resize(n_terms);
  std::string out = "The user reads about";
  for (std::size_t i = 0; i < order.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += order[i];
  }
  out += '.';
  return out;
}

std::string stub_summary(const Article& article, const StubOptions& opt) {
  if (text::count_words(article.body) <= opt.summary_words) return article.body;
  std::string out = text::trim(article.title);
  if (!out.empty() && out.back() != '.' && out.back() != '!' &&
      out.back() != '?') {
    out += '.';
  }
  auto sentences = text::split_sentences(article.body);
  for (std::size_t i = 0; i < std::min(opt.summary_sentences, sentences.size());
       ++i) {
    out += ' ';
    out += sentences[i];
  }
  return text::truncate_words(out, opt.summary_words);
}

}  // namespace

std::string to_string(TemplateName name) { return entry(name).id; }

TemplateName template_name_from_string(const std::string& s) {
  for (const auto& e : kTemplates) {
    if (s == e.id) return e.name;
  }
  throw ConfigError("unknown prompt template: " + s);
}

PromptTemplate PromptTemplate::builtin(TemplateName name) {
  return PromptTemplate{name, entry(name).text};
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_placeholder_char(text[j])) ++j;
    if (j < text.size() && text[j] == ']' && j > i + 1) {
      std::string name = text.substr(i + 1, j - i - 1);
      if (std::find(out.begin(), out.end(), name) == out.end()) {
        out.push_back(std::move(name));
      }
      i = j;
    }
  }
  return out;
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '[') {
      std::size_t j = i + 1;
      while (j < text.size() && is_placeholder_char(text[j])) ++j;
      if (j < text.size() && text[j] == ']' && j > i + 1) {
        std::string name = text.substr(i + 1, j - i - 1);
        auto it = values.find(name);
        if (it == values.end()) {
          throw DataError("missing value for prompt placeholder [" + name +
                          "] in template " + to_string(this->name));
        }
        out += it->second;
        i = j;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

std::string render_user_profile_prompt(
    std::span<const Article* const> history,
    const std::map<std::string, std::string>& user_attrs,
    const PromptTemplate& tmpl, const ProfilePromptOptions& options) {
  if (history.empty()) {
    throw DataError("user profile prompt needs a non-empty history");
  }
  std::string visited;
  for (const Article* a : history) {
    if (!visited.empty()) visited += '\n';
    visited += a->title;
    if (options.include_summaries && a->summary && !a->summary->empty()) {
      visited += ": ";
      visited += *a->summary;
    }
  }
  auto values = user_attrs;
  values["visited_articles"] = visited;
  return tmpl.render(values);
}

std::string render_article_prompt(const Article& article,
                                  const PromptTemplate& tmpl) {
  std::map<std::string, std::string> values = article.attributes;
  values["article_title"] = article.title;
  values["article_body"] = article.body;
  // MIND articles without a category still render.
  values.emplace("category", "general");
  return tmpl.render(values);
}

std::string raw_history_text(std::span<const Article* const> history) {
  std::string out;
  for (const Article* a : history) {
    if (!out.empty()) out += '\n';
    out += a->title;
  }
  return out;
}

std::string StubClient::complete(const CompletionRequest& request) {
  if (request.kind == RequestKind::kArticleSummary) {
    if (request.article == nullptr) {
      throw RuntimeFailure("stub client needs the article");
    }
    return stub_summary(*request.article, options_);
  }
  if (request.history.empty()) {
    throw RuntimeFailure("stub client needs a non-empty history");
  }
  return stub_profile(request.history, options_.profile_terms);
}

ReplayClient::ReplayClient(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) throw ConfigError("cannot open replay fixture " + fixture_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      by_sha_[j.at("prompt_sha").get<std::string>()] =
          j.at("completion").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(fixture_path + ":" + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
}

ReplayClient::ReplayClient(
    std::unordered_map<std::string, std::string> by_prompt_sha)
    : by_sha_(std::move(by_prompt_sha)) {}

std::string ReplayClient::complete(const CompletionRequest& request) {
  auto sha = text::sha256_hex(request.prompt);
  auto it = by_sha_.find(sha);
  if (it == by_sha_.end()) {
    throw RuntimeFailure("no replay fixture for prompt sha " + sha);
  }
  return it->second;
}

RemoteOptions RemoteOptions::from_environment() {
  auto get = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string() : std::string(v);
  };
  RemoteOptions opt;
  opt.endpoint = get("VIEWFLOW_LLM_ENDPOINT");
  opt.model = get("VIEWFLOW_LLM_MODEL");
  opt.api_key = get("VIEWFLOW_LLM_API_KEY");
  if (opt.model.empty()) opt.model = "gpt-3.5-turbo";
  if (opt.endpoint.empty()) {
    throw ConfigError("VIEWFLOW_LLM_ENDPOINT is not set");
  }
  if (opt.api_key.empty()) {
    throw ConfigError("VIEWFLOW_LLM_API_KEY is not set");
  }
  return opt;
}

RemoteClient::RemoteClient(RemoteOptions options) : options_(std::move(options)) {
  if (options_.api_key.empty()) {
    throw ConfigError("remote completion client needs a credential");
  }
  auto scheme_end = options_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must be an http(s) URL: " + options_.endpoint);
  }
  auto path_start = options_.endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_ = options_.endpoint;
    path_ = "/";
  } else {
    base_ = options_.endpoint.substr(0, path_start);
    path_ = options_.endpoint.substr(path_start);
  }
}

std::string RemoteClient::complete(const CompletionRequest& request) {
  json body = {{"model", options_.model},
               {"messages", json::array({{{"role", "user"},
                                          {"content", request.prompt}}})}};
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
    }
    httplib::Client cli(base_);
    cli.set_connection_timeout(options_.timeout_seconds, 0);
    cli.set_read_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers = {
        {"Authorization", "Bearer " + options_.api_key}};
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      auto j = json::parse(res->body);
      if (j.contains("text")) return j.at("text").get<std::string>();
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("bad response: ") + e.what();
    }
  }
  throw RuntimeFailure("completion failed after " +
                       std::to_string(options_.retries + 1) +
                       " attempts: " + last_error);
}

SummaryCache::SummaryCache(std::string path) : path_(std::move(path)) {
  if (path_.empty()) return;
  std::ifstream in(path_);
  if (!in) return;  // first use
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      entries_[j.at("key").get<std::string>()] =
          j.at("completion").get<std::string>();
    } catch (const json::exception&) {
      // A torn trailing line from an interrupted append; later lines win.
    }
  }
}

std::string SummaryCache::make_key(TemplateName name, const std::string& prompt) {
  return text::sha256_hex(to_string(name) + "\n" + prompt);
}

std::optional<std::string> SummaryCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SummaryCache::put(const std::string& key, const std::string& prompt,
                       const std::string& completion) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(key, completion).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw RuntimeFailure("cannot append to cache " + path_);
  json j = {{"key", key},
            {"prompt_sha", text::sha256_hex(prompt)},
            {"completion", completion}};
  out << j.dump() << '\n';
  out.flush();
}

std::size_t SummaryCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Summarizer::Summarizer(std::shared_ptr<CompletionClient> client,
                       std::shared_ptr<SummaryCache> cache,
                       SummarizerOptions options)
    : client_(std::move(client)),
      cache_(std::move(cache)),
      options_(options) {
  if (!client_) throw ConfigError("summarizer needs a completion client");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

std::string Summarizer::complete_cached(const CompletionRequest& request) {
  std::string key;
  if (cache_) {
    key = SummaryCache::make_key(request.template_name, request.prompt);
    if (auto hit = cache_->get(key)) return *hit;
  }
  ++client_calls_;
  std::string out = client_->complete(request);
  if (text::trim(out).empty()) throw RuntimeFailure("empty completion");
  if (cache_) cache_->put(key, request.prompt, out);
  return out;
}

std::string Summarizer::summarize_article(const Article& article) {
  if (text::trim(article.body).empty()) {
    throw DataError("article " + article.id + " has an empty body");
  }
  CompletionRequest req;
  req.kind = RequestKind::kArticleSummary;
  req.template_name = options_.article_template;
  req.prompt = render_article_prompt(
      article, PromptTemplate::builtin(options_.article_template));
  req.article = &article;
  try {
    return complete_cached(req);
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure("article " + article.id + ": " + e.what());
  }
}

std::string Summarizer::summarize_user(
    std::span<const Article* const> history,
    const std::map<std::string, std::string>& attrs) {
  CompletionRequest req;
  req.kind = RequestKind::kUserProfile;
  req.template_name = options_.profile_template;
  req.prompt = render_user_profile_prompt(
      history, attrs, PromptTemplate::builtin(options_.profile_template),
      options_.profile_prompt);
  req.history = history;
  return complete_cached(req);
}

std::vector<std::string> Summarizer::summarize_corpus(Corpus& corpus) {
  std::vector<std::size_t> todo;
  auto& articles = corpus.mutable_articles();
  for (std::size_t i = 0; i < articles.size(); ++i) {
    // An empty body has nothing to summarize; the encoder reads it as is.
    if (!articles[i].summary && !text::trim(articles[i].body).empty()) todo.push_back(i);
  }
  std::vector<std::string> errors;
  std::mutex err_mu;
  for (std::size_t start = 0; start < todo.size();
       start += options_.max_in_flight) {
    std::size_t end = std::min(todo.size(), start + options_.max_in_flight);
    std::vector<std::future<void>> inflight;
    for (std::size_t k = start; k < end; ++k) {
      Article& a = articles[todo[k]];
      inflight.push_back(std::async(std::launch::async, [&, this] {
        try {
          a.summary = summarize_article(a);
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mu);
          errors.push_back(e.what());
        }
      }));
    }
    for (auto& f : inflight) f.get();
  }
  std::sort(errors.begin(), errors.end());
  return errors;
}

}  // namespace viewflow
