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
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "viewflow/checkpoint.hpp"
#include "viewflow/model.hpp"
#include "viewflow/pipeline.hpp"

namespace viewflow {

// A request the server refuses as a whole (unknown candidate, version
// mismatch, malformed body).
class RequestError : public DataError {
 public:
  using DataError::DataError;
};

struct UserEntry {
  std::vector<std::string> history;  // model history, oldest first
  std::string profile_text;
  Vec profile_embedding;
};

// Offline snapshot of article reps and user state for one checkpoint.
struct RepStore {
  std::string model_version;
  std::uint32_t article_dim = 0;
  std::uint32_t text_dim = 0;
  std::map<std::string, Vec> articles;
  std::map<std::string, UserEntry> users;
  bool partial = false;
  std::vector<std::string> errors;
};

constexpr std::uint32_t kRepStoreFormatVersion = 1;

std::string serialize_rep_store(const RepStore& store);
RepStore deserialize_rep_store(const std::string& bytes);
void save_rep_store(const std::string& path, const RepStore& store);
RepStore load_rep_store(const std::string& path);

struct UserHistory {
  std::string user_id;
  std::vector<std::string> history;
};

// The history of each user's latest impression, ordered by user id.
std::vector<UserHistory> latest_user_histories(std::span<const Impression> impressions);

// Encodes every article and every user's profile with the checkpoint.
// Articles or users that fail are listed in `errors` and mark the store
// partial.
RepStore precompute(const Checkpoint& checkpoint, const Corpus& corpus,
                    std::span<const UserHistory> users,
                    const FeatureBuilder& features, ProfileProvider& profiles);

struct RankRequest {
  std::string user_id;
  std::vector<std::string> candidates;
  std::size_t top_k = 0;  // 0 returns every candidate

  static RankRequest from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RankResponse {
  std::vector<ScoredCandidate> items;  // probability descending, stable
  std::string model_version;
  double latency_ms = 0.0;

  nlohmann::json to_json() const;
};

// Scores a request against the store. Unknown users are cold-start.
// Throws RequestError on an unknown candidate or a version mismatch.
RankResponse rank(const RankRequest& request, const RepStore& store,
                  const Checkpoint& checkpoint);

// Holds the serving pair and swaps it atomically.
class Ranker {
 public:
  Ranker(Checkpoint checkpoint, RepStore store);

  RankResponse rank(const RankRequest& request) const;
  void swap(Checkpoint checkpoint, RepStore store);
  std::string model_version() const;

 private:
  struct State {
    Checkpoint checkpoint;
    RepStore store;
  };
  std::shared_ptr<const State> snapshot() const;

  mutable std::mutex mu_;
  std::shared_ptr<const State> state_;
};

// JSON-over-HTTP front end: POST /rank, GET /health.
class RankServer {
 public:
  explicit RankServer(std::shared_ptr<Ranker> ranker);
  ~RankServer();

  // Binds and serves until stop(). Returns false when binding fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace viewflow
