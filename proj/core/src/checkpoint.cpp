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

#include "viewflow/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "viewflow/error.hpp"
#include "viewflow/text.hpp"

namespace viewflow {

namespace {

constexpr char kMagic[4] = {'V', 'F', 'C', 'K'};

CheckpointHeader read_header(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  CheckpointHeader h;
  h.format_version = binio::read_le<std::uint32_t>(in);
  if (h.format_version != kCheckpointFormatVersion) {
    throw DataError("unsupported checkpoint format version " +
                    std::to_string(h.format_version));
  }
  h.attr_dim = binio::read_le<std::uint32_t>(in);
  h.proj_dim = binio::read_le<std::uint32_t>(in);
  h.article_dim = binio::read_le<std::uint32_t>(in);
  h.flag_bits = binio::read_le<std::uint32_t>(in);
  h.parameter_count = binio::read_le<std::uint64_t>(in);
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::uint32_t flag_bits(const AblationFlags& f) {
  return (f.instant_flow ? 1U : 0U) | (f.constant_flow ? 2U : 0U) |
         (f.flow_gate ? 4U : 0U) | (f.use_instruct_u ? 8U : 0U) |
         (f.use_summaries ? 16U : 0U);
}

std::string serialize_checkpoint(Checkpoint& ckpt) {
  ckpt.params.check_shapes(ckpt.config);
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  binio::write_le<std::uint32_t>(out, kCheckpointFormatVersion);
  binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.config.attr_out_dim));
  binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.config.proj_dim));
  binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.config.article_dim()));
  binio::write_le<std::uint32_t>(out, flag_bits(ckpt.config.flags));
  binio::write_le<std::uint64_t>(out, ckpt.params.trainable_count());
  nlohmann::json meta = ckpt.metadata;
  meta["model"] = ckpt.config.to_json();
  binio::write_string(out, meta.dump());
  std::uint32_t n = 0;
  ckpt.params.for_each_tensor(ModelParams::ConstVisitor(
      [&](const std::string&, Eigen::Map<const Mat>, bool) { ++n; }));
  binio::write_le<std::uint32_t>(out, n);
  ckpt.params.for_each_tensor(ModelParams::ConstVisitor(
      [&](const std::string& name, Eigen::Map<const Mat> t, bool is_vector) {
        write_tensor(out, name, Mat(t), DType::kFloat32, is_vector);
      }));
  std::string bytes = out.str();
  ckpt.version = text::sha256_hex(bytes).substr(0, 16);
  return bytes;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  CheckpointHeader h = read_header(in);
  Checkpoint ckpt;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(binio::read_string(in));
    ckpt.config = ModelConfig::from_json(meta.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  meta.erase("model");
  ckpt.metadata = std::move(meta);
  if (h.attr_dim != ckpt.config.attr_out_dim ||
      h.proj_dim != ckpt.config.proj_dim ||
      h.article_dim != ckpt.config.article_dim() ||
      h.flag_bits != flag_bits(ckpt.config.flags)) {
    throw DataError("checkpoint header disagrees with its metadata");
  }
  ckpt.params = ModelParams::zeros(ckpt.config);
  std::map<std::string, NamedTensor> tensors;
  auto n = binio::read_le<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    NamedTensor t = read_tensor(in);
    std::string name = t.name;
    tensors.emplace(std::move(name), std::move(t));
  }
  std::size_t used = 0;
  auto assign = [&](const std::string& name, Eigen::Map<Mat> dst) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw ConfigError("checkpoint is missing tensor " + name);
    }
    if (it->second.value.rows() != dst.rows() ||
        it->second.value.cols() != dst.cols()) {
      throw ConfigError("checkpoint tensor " + name + " has a stale shape");
    }
    dst = it->second.value;
    ++used;
  };
  ckpt.params.for_each_trainable(ModelParams::Visitor(
      [&](const std::string& name, Eigen::Map<Mat> t, bool) { assign(name, t); }));
  if (ckpt.params.bn_running_mean.size() > 0) {
    auto& m = ckpt.params.bn_running_mean;
    auto& v = ckpt.params.bn_running_var;
    assign("buffer/bn_running_mean", Eigen::Map<Mat>(m.data(), m.size(), 1));
    assign("buffer/bn_running_var", Eigen::Map<Mat>(v.data(), v.size(), 1));
  }
  if (used != tensors.size()) {
    throw ConfigError("checkpoint has tensors the configuration does not use");
  }
  if (ckpt.params.trainable_count() != h.parameter_count) {
    throw DataError("checkpoint parameter count mismatch");
  }
  ckpt.version = text::sha256_hex(bytes).substr(0, 16);
  return ckpt;
}

void save_checkpoint(const std::string& path, Checkpoint& checkpoint) {
  std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  return read_header(in);
}

void round_to_storage_precision(ModelParams& params) {
  auto round = [](const std::string&, Eigen::Map<Mat> t, bool) {
    t = t.cast<float>().cast<double>();
  };
  params.for_each_trainable(ModelParams::Visitor(round));
  if (params.bn_running_mean.size() > 0) {
    params.bn_running_mean = params.bn_running_mean.cast<float>().cast<double>();
    params.bn_running_var = params.bn_running_var.cast<float>().cast<double>();
  }
}

}  // namespace viewflow
