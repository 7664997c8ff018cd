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

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "viewflow/article.hpp"

namespace viewflow {

enum class TemplateName {
  kArticleSummaryMind,
  kUserProfileMind,
  kArticleSummaryAta,
  kUserProfileAta,
};

std::string to_string(TemplateName name);
TemplateName template_name_from_string(const std::string& s);

// Instruction text with [placeholder] slots.
struct PromptTemplate {
  TemplateName name;
  std::string text;

  static PromptTemplate builtin(TemplateName name);

  // Names of the placeholders in order of first appearance.
  std::vector<std::string> placeholders() const;

  // Substitutes every placeholder. Throws DataError naming the first
  // placeholder without a value. Extra values are ignored.
  std::string render(const std::map<std::string, std::string>& values) const;
};

struct ProfilePromptOptions {
  // Append ": <summary>" to each visited title when a summary exists.
  bool include_summaries = false;
};

// Renders the user-profile instruction over a non-empty history. Visited
// articles are one title per line. `user_attrs` supplies position,
// organization and skill for the ATA template.
std::string render_user_profile_prompt(
    std::span<const Article* const> history,
    const std::map<std::string, std::string>& user_attrs,
    const PromptTemplate& tmpl, const ProfilePromptOptions& options = {});

std::string render_article_prompt(const Article& article,
                                  const PromptTemplate& tmpl);

enum class RequestKind { kArticleSummary, kUserProfile };

struct CompletionRequest {
  RequestKind kind = RequestKind::kArticleSummary;
  TemplateName template_name = TemplateName::kArticleSummaryMind;
  std::string prompt;
  // Structured context for clients that do not call a model.
  const Article* article = nullptr;
  std::span<const Article* const> history;
};

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct StubOptions {
  std::size_t summary_words = 60;
  std::size_t summary_sentences = 3;
  std::size_t profile_terms = 24;
};

// Deterministic offline client. Article summaries are the title followed by
// the leading body sentences, cut to the word budget; bodies already within
// budget come back verbatim. Profiles list the most frequent non-stopword
// title tokens of the history.
class StubClient : public CompletionClient {
 public:
  explicit StubClient(StubOptions options = {}) : options_(options) {}
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "stub"; }

  const StubOptions& options() const { return options_; }

 private:
  StubOptions options_;
};

// Serves recorded completions keyed by the SHA-256 of the prompt. Fixture
// file: JSONL of {"prompt_sha": ..., "completion": ...}.
class ReplayClient : public CompletionClient {
 public:
  explicit ReplayClient(const std::string& fixture_path);
  ReplayClient(std::unordered_map<std::string, std::string> by_prompt_sha);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const { return by_sha_.size(); }

 private:
  std::unordered_map<std::string, std::string> by_sha_;
};

struct RemoteOptions {
  std::string endpoint;  // e.g. http://host:port/v1/complete
  std::string model;
  std::string api_key;
  int retries = 3;
  int timeout_seconds = 60;
  int backoff_ms = 200;

  // Reads VIEWFLOW_LLM_ENDPOINT, VIEWFLOW_LLM_MODEL and VIEWFLOW_LLM_API_KEY.
  // Throws ConfigError when the endpoint or credential is unset.
  static RemoteOptions from_environment();
};

// JSON-over-HTTP chat completion: POST {model, messages:[{role, content}]},
// response {text} (an OpenAI-style choices[0].message.content is accepted
// too).
class RemoteClient : public CompletionClient {
 public:
  explicit RemoteClient(RemoteOptions options);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "remote"; }

 private:
  RemoteOptions options_;
  std::string base_;
  std::string path_;
};

// Append-only JSONL store of {key, prompt_sha, completion}. An empty path
// keeps the cache in memory only.
class SummaryCache {
 public:
  explicit SummaryCache(std::string path = {});

  static std::string make_key(TemplateName name, const std::string& prompt);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& prompt,
           const std::string& completion);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

struct SummarizerOptions {
  TemplateName article_template = TemplateName::kArticleSummaryMind;
  TemplateName profile_template = TemplateName::kUserProfileMind;
  ProfilePromptOptions profile_prompt;
  std::size_t max_in_flight = 4;
};

// Builds prompts, consults the cache, and calls the client on misses.
class Summarizer {
 public:
  Summarizer(std::shared_ptr<CompletionClient> client,
             std::shared_ptr<SummaryCache> cache, SummarizerOptions options);

  // Throws DataError for an empty body and RuntimeFailure carrying the
  // article id when the client fails or returns an empty completion.
  std::string summarize_article(const Article& article);

  std::string summarize_user(std::span<const Article* const> history,
                             const std::map<std::string, std::string>& attrs);

  // Fills Article::summary for every article lacking one (empty bodies are
  // skipped), issuing at most max_in_flight concurrent client calls.
  // Returns one message per failure.
  std::vector<std::string> summarize_corpus(Corpus& corpus);

  std::size_t client_calls() const { return client_calls_.load(); }
  const SummarizerOptions& options() const { return options_; }

 private:
  std::string complete_cached(const CompletionRequest& request);

  std::shared_ptr<CompletionClient> client_;
  std::shared_ptr<SummaryCache> cache_;
  SummarizerOptions options_;
  std::atomic<std::size_t> client_calls_{0};
};

// Profile text used when prompting is disabled: visited titles joined by
// newlines.
std::string raw_history_text(std::span<const Article* const> history);

}  // namespace viewflow
