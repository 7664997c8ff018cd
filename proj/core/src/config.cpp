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

#include "viewflow/config.hpp"

#include <filesystem>
#include <fstream>

#include "viewflow/error.hpp"

namespace viewflow {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const nlohmann::json& j, const std::string& section,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(section + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key " + section + "." + key);
  }
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

TemplateName article_template_for(const std::string& set) {
  return set == "ata" ? TemplateName::kArticleSummaryAta
                      : TemplateName::kArticleSummaryMind;
}

TemplateName profile_template_for(const std::string& set) {
  return set == "ata" ? TemplateName::kUserProfileAta : TemplateName::kUserProfileMind;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (summarizer.client != "stub" && summarizer.client != "replay" &&
      summarizer.client != "remote") {
    throw ConfigError("summarizer.client must be stub, replay or remote");
  }
  if (summarizer.client == "replay" && summarizer.fixtures.empty()) {
    throw ConfigError("summarizer.fixtures is required for the replay client");
  }
  if (summarizer.templates != "mind" && summarizer.templates != "ata") {
    throw ConfigError("summarizer.templates must be mind or ata");
  }
  if (summarizer.max_in_flight == 0) {
    throw ConfigError("summarizer.max_in_flight must be at least 1");
  }
  if (summarizer.stub.summary_words == 0) {
    throw ConfigError("summarizer.summary_words must be at least 1");
  }
  if (out.empty()) throw ConfigError("out must be set");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["data"] = {{"train", data.train},
               {"val", data.val},
               {"test", data.test},
               {"user_attributes", data.user_attributes}};
  j["model"] = model.to_json();
  j["train"] = train.to_json();
  j["summarizer"] = {{"client", summarizer.client},
                     {"fixtures", summarizer.fixtures},
                     {"cache", summarizer.cache},
                     {"templates", summarizer.templates},
                     {"summary_words", summarizer.stub.summary_words},
                     {"summary_sentences", summarizer.stub.summary_sentences},
                     {"profile_terms", summarizer.stub.profile_terms},
                     {"include_summaries", summarizer.include_summaries},
                     {"max_in_flight", summarizer.max_in_flight}};
  j["out"] = out;
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  reject_unknown(j, "config", {"data", "model", "train", "summarizer", "out", "seed"});
  RunConfig c;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    reject_unknown(d, "data", {"train", "val", "test", "user_attributes"});
    c.data.train = resolve(base_dir, get_or<std::string>(d, "train", ""));
    c.data.val = resolve(base_dir, get_or<std::string>(d, "val", ""));
    c.data.test = resolve(base_dir, get_or<std::string>(d, "test", ""));
    c.data.user_attributes =
        resolve(base_dir, get_or<std::string>(d, "user_attributes", ""));
  }
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
  if (c.model.embedder.kind == "precomputed") {
    c.model.embedder.path = resolve(base_dir, c.model.embedder.path);
  }
  if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
  if (j.contains("summarizer")) {
    const auto& s = j.at("summarizer");
    reject_unknown(s, "summarizer",
                   {"client", "fixtures", "cache", "templates", "summary_words",
                    "summary_sentences", "profile_terms", "include_summaries",
                    "max_in_flight"});
    auto& sc = c.summarizer;
    sc.client = get_or<std::string>(s, "client", sc.client);
    sc.fixtures = resolve(base_dir, get_or<std::string>(s, "fixtures", ""));
    sc.cache = resolve(base_dir, get_or<std::string>(s, "cache", ""));
    sc.templates = get_or<std::string>(s, "templates", sc.templates);
    sc.stub.summary_words = get_or<std::size_t>(s, "summary_words", sc.stub.summary_words);
    sc.stub.summary_sentences =
        get_or<std::size_t>(s, "summary_sentences", sc.stub.summary_sentences);
    sc.stub.profile_terms = get_or<std::size_t>(s, "profile_terms", sc.stub.profile_terms);
    sc.include_summaries = get_or<bool>(s, "include_summaries", sc.include_summaries);
    sc.max_in_flight = get_or<std::size_t>(s, "max_in_flight", sc.max_in_flight);
  }
  c.out = resolve(base_dir, get_or<std::string>(j, "out", c.out));
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  // The run seed drives training unless the train section pins its own.
  if (!(j.contains("train") && j.at("train").contains("seed"))) c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

std::shared_ptr<CompletionClient> make_client(const SummarizerConfig& config) {
  if (config.client == "stub") return std::make_shared<StubClient>(config.stub);
  if (config.client == "replay") return std::make_shared<ReplayClient>(config.fixtures);
  if (config.client == "remote") {
    return std::make_shared<RemoteClient>(RemoteOptions::from_environment());
  }
  throw ConfigError("unknown summarizer client " + config.client);
}

std::shared_ptr<Summarizer> make_summarizer(const SummarizerConfig& config) {
  SummarizerOptions options;
  options.article_template = article_template_for(config.templates);
  options.profile_template = profile_template_for(config.templates);
  options.profile_prompt.include_summaries = config.include_summaries;
  options.max_in_flight = config.max_in_flight;
  return std::make_shared<Summarizer>(make_client(config),
                                      std::make_shared<SummaryCache>(config.cache),
                                      options);
}

UserAttributes load_user_attributes(const std::string& path) {
  UserAttributes out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read user attributes " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out[j.at("user").get<std::string>()] =
          j.at("attributes").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace viewflow
