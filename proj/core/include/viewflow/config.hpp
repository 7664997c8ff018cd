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
#include <memory>
#include <string>

#include "json.hpp"
#include "viewflow/model_config.hpp"
#include "viewflow/pipeline.hpp"
#include "viewflow/summarizer.hpp"
#include "viewflow/training.hpp"

namespace viewflow {

struct DataPaths {
  std::string train;
  std::string val;   // optional; otherwise split from train by time
  std::string test;  // optional
  std::string user_attributes;  // optional JSONL {user, attributes}
};

struct SummarizerConfig {
  std::string client = "stub";  // stub | replay | remote
  std::string fixtures;         // replay fixture JSONL
  std::string cache;            // optional append-only cache file
  std::string templates = "mind";  // mind | ata
  StubOptions stub;
  bool include_summaries = false;  // add summaries to profile prompts
  std::size_t max_in_flight = 4;
};

// Everything a run needs, read from one JSON file. Unknown keys are
// rejected and relative paths resolve against the file's directory.
struct RunConfig {
  DataPaths data;
  ModelConfig model;
  TrainConfig train;
  SummarizerConfig summarizer;
  std::string out = "runs/default";
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = {});
  static RunConfig load(const std::string& path);
};

std::shared_ptr<CompletionClient> make_client(const SummarizerConfig& config);
std::shared_ptr<Summarizer> make_summarizer(const SummarizerConfig& config);

// Reads {"user": ..., "attributes": {...}} lines.
UserAttributes load_user_attributes(const std::string& path);

}  // namespace viewflow
