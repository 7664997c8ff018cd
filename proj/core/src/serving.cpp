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

#include "viewflow/serving.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "viewflow/encoder.hpp"
#include "viewflow/tensor_io.hpp"

namespace viewflow {

namespace {

constexpr char kStoreMagic[4] = {'V', 'F', 'R', 'S'};

}  // namespace

std::string serialize_rep_store(const RepStore& store) {
  std::ostringstream out(std::ios::binary);
  out.write(kStoreMagic, 4);
  binio::write_le<std::uint32_t>(out, kRepStoreFormatVersion);
  binio::write_string(out, store.model_version);
  binio::write_le<std::uint32_t>(out, store.article_dim);
  binio::write_le<std::uint32_t>(out, store.text_dim);
  binio::write_le<std::uint8_t>(out, store.partial ? 1 : 0);
  binio::write_le<std::uint64_t>(out, store.errors.size());
  for (const auto& e : store.errors) binio::write_string(out, e);
  binio::write_le<std::uint64_t>(out, store.articles.size());
  for (const auto& [id, rep] : store.articles) {
    write_tensor(out, id, rep, DType::kFloat64, true);
  }
  binio::write_le<std::uint64_t>(out, store.users.size());
  for (const auto& [id, user] : store.users) {
    binio::write_string(out, id);
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(user.history.size()));
    for (const auto& h : user.history) binio::write_string(out, h);
    binio::write_string(out, user.profile_text);
    write_tensor(out, "profile", user.profile_embedding, DType::kFloat64, true);
  }
  return out.str();
}

RepStore deserialize_rep_store(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kStoreMagic)) {
    throw DataError("not a rep store file");
  }
  const auto format = binio::read_le<std::uint32_t>(in);
  if (format != kRepStoreFormatVersion) {
    throw DataError("unsupported rep store format version " + std::to_string(format));
  }
  RepStore store;
  store.model_version = binio::read_string(in);
  store.article_dim = binio::read_le<std::uint32_t>(in);
  store.text_dim = binio::read_le<std::uint32_t>(in);
  store.partial = binio::read_le<std::uint8_t>(in) != 0;
  const auto n_errors = binio::read_le<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_errors; ++i) {
    store.errors.push_back(binio::read_string(in));
  }
  const auto n_articles = binio::read_le<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_articles; ++i) {
    auto t = read_tensor(in);
    if (t.value.size() != store.article_dim) {
      throw DataError("rep for " + t.name + " has wrong dimension");
    }
    store.articles.emplace(t.name, Vec(t.value.reshaped()));
  }
  const auto n_users = binio::read_le<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_users; ++i) {
    std::string id = binio::read_string(in);
    UserEntry user;
    const auto n_hist = binio::read_le<std::uint32_t>(in);
    for (std::uint32_t k = 0; k < n_hist; ++k) user.history.push_back(binio::read_string(in));
    user.profile_text = binio::read_string(in);
    user.profile_embedding = Vec(read_tensor(in).value.reshaped());
    store.users.emplace(std::move(id), std::move(user));
  }
  return store;
}

void save_rep_store(const std::string& path, const RepStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write rep store " + path);
  const std::string bytes = serialize_rep_store(store);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("failed writing rep store " + path);
}

RepStore load_rep_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read rep store " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_rep_store(ss.str());
}

std::vector<UserHistory> latest_user_histories(std::span<const Impression> impressions) {
  std::map<std::string, const Impression*> latest;
  for (const auto& imp : impressions) {
    auto [it, inserted] = latest.emplace(imp.user_id, &imp);
    if (!inserted && imp.timestamp >= it->second->timestamp) it->second = &imp;
  }
  std::vector<UserHistory> out;
  out.reserve(latest.size());
  for (const auto& [user, imp] : latest) out.push_back({user, imp->history});
  return out;
}

RepStore precompute(const Checkpoint& checkpoint, const Corpus& corpus,
                    std::span<const UserHistory> users,
                    const FeatureBuilder& features, ProfileProvider& profiles) {
  const ModelConfig& config = checkpoint.config;
  RepStore store;
  store.model_version = checkpoint.version;
  store.article_dim = static_cast<std::uint32_t>(config.article_dim());
  store.text_dim = static_cast<std::uint32_t>(config.text_dim);
  ArticleEncoder encoder(config, checkpoint.params);
  for (const auto& article : corpus.articles()) {
    try {
      store.articles.emplace(article.id, encoder.encode(features.build(article)).h);
    } catch (const DataError& e) {
      store.errors.push_back("article " + article.id + ": " + e.what());
    }
  }
  for (const auto& u : users) {
    try {
      UserEntry entry;
      entry.history = model_history(config, u.history);
      std::vector<const Article*> hist;
      for (const auto& h : entry.history) {
        const Article* a = corpus.find(h);
        if (!a || !store.articles.contains(h)) {
          throw DataError("history article " + h + " has no rep");
        }
        hist.push_back(a);
      }
      entry.profile_text = profiles.profile_text(u.user_id, hist);
      entry.profile_embedding = features.embed_profile(
          ProfileProvider::profile_id(u.user_id, entry.history), entry.profile_text);
      store.users.emplace(u.user_id, std::move(entry));
    } catch (const DataError& e) {
      store.errors.push_back("user " + u.user_id + ": " + e.what());
    }
  }
  store.partial = !store.errors.empty();
  return store;
}

RankRequest RankRequest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw RequestError("request must be a JSON object");
  RankRequest r;
  try {
    r.user_id = j.at("user_id").get<std::string>();
    r.candidates = j.at("candidates").get<std::vector<std::string>>();
    if (j.contains("top_k")) r.top_k = j.at("top_k").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw RequestError(std::string("bad request: ") + e.what());
  }
  return r;
}

nlohmann::json RankRequest::to_json() const {
  return {{"user_id", user_id}, {"candidates", candidates}, {"top_k", top_k}};
}

nlohmann::json RankResponse::to_json() const {
  nlohmann::json items_json = nlohmann::json::array();
  for (const auto& c : items) {
    items_json.push_back({{"article_id", c.article_id}, {"probability", c.probability}});
  }
  return {{"items", items_json},
          {"model_version", model_version},
          {"latency_ms", latency_ms}};
}

RankResponse rank(const RankRequest& request, const RepStore& store,
                  const Checkpoint& checkpoint) {
  const auto start = std::chrono::steady_clock::now();
  if (store.model_version != checkpoint.version) {
    throw RequestError("store version " + store.model_version +
                       " does not match checkpoint " + checkpoint.version);
  }
  if (request.candidates.empty()) throw RequestError("no candidates");
  std::vector<const Vec*> candidates;
  candidates.reserve(request.candidates.size());
  for (const auto& id : request.candidates) {
    auto it = store.articles.find(id);
    if (it == store.articles.end()) throw RequestError("unknown candidate " + id);
    candidates.push_back(&it->second);
  }

  const ModelConfig& config = checkpoint.config;
  std::vector<const Vec*> history;
  Vec cold_profile;
  const Vec* profile_embedding = nullptr;
  if (auto it = store.users.find(request.user_id); it != store.users.end()) {
    for (const auto& h : it->second.history) history.push_back(&store.articles.at(h));
    profile_embedding = &it->second.profile_embedding;
  } else {
    cold_profile = Vec::Zero(static_cast<Eigen::Index>(store.text_dim));
    profile_embedding = &cold_profile;
  }

  Scorer scorer(config, checkpoint.params);
  Vec profile;
  if (config.flags.constant_flow) profile = scorer.profile_vector(*profile_embedding);
  RankResponse response;
  response.model_version = store.model_version;
  response.items.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    response.items.push_back(
        scorer.score(request.candidates[i], *candidates[i], history, profile));
  }
  std::stable_sort(response.items.begin(), response.items.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) {
                     return a.probability > b.probability;
                   });
  if (request.top_k > 0 && request.top_k < response.items.size()) {
    response.items.resize(request.top_k);
  }
  response.latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return response;
}

Ranker::Ranker(Checkpoint checkpoint, RepStore store) {
  swap(std::move(checkpoint), std::move(store));
}

void Ranker::swap(Checkpoint checkpoint, RepStore store) {
  if (store.model_version != checkpoint.version) {
    throw ConfigError("store version " + store.model_version +
                      " does not match checkpoint " + checkpoint.version);
  }
  auto next = std::make_shared<const State>(State{std::move(checkpoint), std::move(store)});
  std::lock_guard lock(mu_);
  state_ = std::move(next);
}

std::shared_ptr<const Ranker::State> Ranker::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

RankResponse Ranker::rank(const RankRequest& request) const {
  auto s = snapshot();
  return viewflow::rank(request, s->store, s->checkpoint);
}

std::string Ranker::model_version() const { return snapshot()->checkpoint.version; }

struct RankServer::Impl {
  std::shared_ptr<Ranker> ranker;
  httplib::Server server;
};

RankServer::RankServer(std::shared_ptr<Ranker> ranker) : impl_(std::make_unique<Impl>()) {
  impl_->ranker = std::move(ranker);
  auto* impl = impl_.get();
  auto send_error = [](httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
  };
  impl_->server.Get("/health", [impl](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body{{"status", "ok"}, {"model_version", impl->ranker->model_version()}};
    res.set_content(body.dump(), "application/json");
  });
  impl_->server.Post("/rank", [impl, send_error](const httplib::Request& req,
                                                 httplib::Response& res) {
    try {
      auto body = nlohmann::json::parse(req.body);
      auto response = impl->ranker->rank(RankRequest::from_json(body));
      res.set_content(response.to_json().dump(), "application/json");
    } catch (const nlohmann::json::parse_error& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const RequestError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });
}

RankServer::~RankServer() { stop(); }

bool RankServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int RankServer::bind_any(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool RankServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void RankServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace viewflow
