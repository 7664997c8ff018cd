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

#include "viewflow/pipeline.hpp"

#include "viewflow/error.hpp"
#include "viewflow/text.hpp"

namespace viewflow {

ProfileProvider::ProfileProvider(std::shared_ptr<Summarizer> summarizer,
                                 bool use_instruct_u,
                                 UserAttributes user_attributes)
    : summarizer_(std::move(summarizer)),
      use_instruct_u_(use_instruct_u),
      user_attributes_(std::move(user_attributes)) {
  if (use_instruct_u_ && !summarizer_) {
    throw ConfigError("prompted user profiles need a summarizer");
  }
}

std::string ProfileProvider::profile_id(const std::string& user_id,
                                        std::span<const std::string> history_ids) {
  std::string key = user_id;
  for (const auto& h : history_ids) {
    key += '\x1f';
    key += h;
  }
  return text::sha256_hex(key).substr(0, 24);
}

std::string ProfileProvider::profile_text(const std::string& user_id,
                                          std::span<const Article* const> history) {
  if (history.empty()) return {};
  std::vector<std::string> ids;
  ids.reserve(history.size());
  for (const Article* a : history) ids.push_back(a->id);
  std::string id = profile_id(user_id, ids);
  if (auto it = memo_.find(id); it != memo_.end()) return it->second;
  std::string out;
  if (use_instruct_u_) {
    static const std::map<std::string, std::string> kNoAttrs;
    auto it = user_attributes_.find(user_id);
    out = summarizer_->summarize_user(
        history, it == user_attributes_.end() ? kNoAttrs : it->second);
  } else {
    out = raw_history_text(history);
  }
  memo_.emplace(std::move(id), out);
  return out;
}

std::vector<std::string> model_history(const ModelConfig& config,
                                       const std::vector<std::string>& history) {
  if (config.max_history == 0 || history.size() <= config.max_history) {
    return history;
  }
  return {history.end() - static_cast<std::ptrdiff_t>(config.max_history),
          history.end()};
}

PreparedDataset prepare_dataset(const Corpus& corpus,
                                std::span<const Impression> impressions,
                                const FeatureBuilder& features,
                                ProfileProvider& profiles) {
  PreparedDataset out;
  out.features.reserve(corpus.size());
  for (const auto& a : corpus.articles()) {
    out.article_index.emplace(a.id, out.article_ids.size());
    out.article_ids.push_back(a.id);
    out.features.push_back(features.build(a));
  }
  std::unordered_map<std::string, std::size_t> profile_index;
  auto lookup = [&](const std::string& id) {
    auto it = out.article_index.find(id);
    if (it == out.article_index.end()) {
      throw DataError("unknown article id " + id);
    }
    return it->second;
  };
  for (const auto& imp : impressions) {
    PreparedImpression p;
    p.id = imp.id;
    p.user_id = imp.user_id;
    auto hist_ids = model_history(features.config(), imp.history);
    std::vector<const Article*> hist_articles;
    for (const auto& h : hist_ids) {
      p.history.push_back(lookup(h));
      hist_articles.push_back(&corpus.articles()[p.history.back()]);
    }
    for (const auto& c : imp.candidates) {
      p.candidates.push_back(lookup(c.article_id));
      p.labels.push_back(c.label);
    }
    if (p.candidates.empty()) {
      throw DataError("impression " + imp.id + " has no candidates");
    }
    std::string pid = ProfileProvider::profile_id(imp.user_id, hist_ids);
    auto it = profile_index.find(pid);
    if (it == profile_index.end()) {
      PreparedProfile prof;
      prof.id = pid;
      prof.text = profiles.profile_text(imp.user_id, hist_articles);
      prof.embedding = features.embed_profile(pid, prof.text);
      it = profile_index.emplace(pid, out.profiles.size()).first;
      out.profiles.push_back(std::move(prof));
    }
    p.profile = it->second;
    out.impressions.push_back(std::move(p));
  }
  return out;
}

std::vector<Vec> encode_articles(const ModelConfig& config,
                                 const ModelParams& params,
                                 std::span<const ArticleFeatures> features) {
  ArticleEncoder encoder(config, params);
  std::vector<Vec> reps;
  reps.reserve(features.size());
  for (const auto& f : features) reps.push_back(encoder.encode(f).h);
  return reps;
}

std::vector<ScoredCandidate> score_impression(const ModelConfig& config,
                                              const ModelParams& params,
                                              const PreparedDataset& data,
                                              const std::vector<Vec>& reps,
                                              const PreparedImpression& imp) {
  Scorer scorer(config, params);
  std::vector<const Vec*> history;
  history.reserve(imp.history.size());
  for (std::size_t h : imp.history) history.push_back(&reps[h]);
  Vec profile;
  if (config.flags.constant_flow) {
    profile = scorer.profile_vector(data.profiles[imp.profile].embedding);
  }
  std::vector<ScoredCandidate> out;
  out.reserve(imp.candidates.size());
  for (std::size_t c : imp.candidates) {
    out.push_back(scorer.score(data.article_ids[c], reps[c], history, profile));
  }
  return out;
}

EvaluationOutput evaluate_model(const ModelConfig& config,
                                const ModelParams& params,
                                const PreparedDataset& data, AucMode mode) {
  EvaluationOutput out;
  auto reps = encode_articles(config, params, data.features);
  std::vector<RankedImpression> ranked;
  ranked.reserve(data.impressions.size());
  for (const auto& imp : data.impressions) {
    auto scored = score_impression(config, params, data, reps, imp);
    RankedImpression r;
    r.impression_id = imp.id;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      r.items.push_back({scored[i].probability, imp.labels[i]});
    }
    ranked.push_back(std::move(r));
    out.scores.push_back(std::move(scored));
  }
  out.report = evaluate(ranked, mode);
  return out;
}

}  // namespace viewflow
