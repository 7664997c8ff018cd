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

#include <cstring>
#include <filesystem>

#include "support.hpp"
#include "viewflow/checkpoint.hpp"
#include "viewflow/error.hpp"

namespace viewflow {
namespace {

using testing::random_params;
using testing::toy_config;

std::vector<Mat> tensors_of(const ModelParams& p) {
  std::vector<Mat> out;
  p.for_each_tensor([&](const std::string&, Eigen::Map<const Mat> t, bool) { out.emplace_back(t); });
  return out;
}

Checkpoint make(const ModelConfig& config, std::uint64_t seed) {
  Checkpoint ck{config, random_params(config, seed), {{"run", "test"}}, {}};
  return ck;
}

// Header (32 bytes) plus the length-prefixed metadata.
std::size_t prefix_length(const std::string& bytes) {
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 32, 4);
  return 36 + n;
}

TEST(Checkpoint, RoundTripIsFloat32Exact) {
  auto config = toy_config();
  auto ck = make(config, 1);
  auto bytes = serialize_checkpoint(ck);
  auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.version, ck.version);
  EXPECT_EQ(back.version.size(), 16u);
  EXPECT_EQ(back.config.to_json(), config.to_json());
  EXPECT_EQ(back.metadata["run"], "test");
  auto rounded = ck.params;
  round_to_storage_precision(rounded);
  auto a = tensors_of(rounded), b = tensors_of(back.params);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  // A second cycle changes nothing.
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, SaveLoadAndHeader) {
  auto config = toy_config();
  auto ck = make(config, 2);
  auto path = (std::filesystem::temp_directory_path() / "viewflow_ck.bin").string();
  save_checkpoint(path, ck);
  auto loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.version, ck.version);
  auto h = read_checkpoint_header(path);
  EXPECT_EQ(h.format_version, kCheckpointFormatVersion);
  EXPECT_EQ(h.attr_dim, 2u);
  EXPECT_EQ(h.proj_dim, 3u);
  EXPECT_EQ(h.article_dim, 8u);
  EXPECT_EQ(h.flag_bits, flag_bits(config.flags));
  EXPECT_EQ(h.parameter_count, ck.params.trainable_count());
  EXPECT_THROW(load_checkpoint(path + ".missing"), ConfigError);
}

TEST(Checkpoint, VersionTracksContent) {
  auto config = toy_config();
  auto a = make(config, 1), b = make(config, 1), c = make(config, 2);
  serialize_checkpoint(a);
  serialize_checkpoint(b);
  serialize_checkpoint(c);
  EXPECT_EQ(a.version, b.version);
  EXPECT_NE(a.version, c.version);
}

TEST(Checkpoint, AblatedModelStoresFewerParameters) {
  AblationFlags f;
  f.instant_flow = false;
  auto full = make(toy_config(), 1);
  auto ablated = make(toy_config(f), 1);
  serialize_checkpoint(full);
  auto bytes = serialize_checkpoint(ablated);
  EXPECT_LT(ablated.params.trainable_count(), full.params.trainable_count());
  EXPECT_EQ(full.params.trainable_count() - ablated.params.trainable_count(),
            8u * 8u + 8u);  // bilinear plus one head block
  EXPECT_FALSE(deserialize_checkpoint(bytes).config.flags.instant_flow);
}

TEST(Checkpoint, StaleShapesAreRejected) {
  auto full = make(toy_config(), 1);
  auto full_bytes = serialize_checkpoint(full);
  auto tensors = full_bytes.substr(prefix_length(full_bytes));

  auto wider_config = toy_config();
  wider_config.proj_dim = 4;
  auto wider = make(wider_config, 1);
  auto wider_bytes = serialize_checkpoint(wider);
  EXPECT_THROW(deserialize_checkpoint(wider_bytes.substr(0, prefix_length(wider_bytes)) + tensors),
               ConfigError);

  AblationFlags f;
  f.instant_flow = false;
  auto ablated = make(toy_config(f), 1);
  auto ablated_bytes = serialize_checkpoint(ablated);
  EXPECT_THROW(
      deserialize_checkpoint(ablated_bytes.substr(0, prefix_length(ablated_bytes)) + tensors),
      ConfigError);
}

TEST(Checkpoint, CorruptBytesAreDataErrors) {
  auto ck = make(toy_config(), 1);
  auto bytes = serialize_checkpoint(ck);
  EXPECT_THROW(deserialize_checkpoint("XXXX" + bytes.substr(4)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 10)), DataError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(deserialize_checkpoint(bad_version), DataError);
  auto bad_meta = bytes;
  bad_meta[36] = '#';
  EXPECT_THROW(deserialize_checkpoint(bad_meta), DataError);
}

TEST(Checkpoint, MismatchedParamsRefuseToSerialize) {
  Checkpoint ck{toy_config(), ModelParams::zeros(toy_config()), {}, {}};
  ck.config.proj_dim = 5;
  EXPECT_THROW(serialize_checkpoint(ck), ConfigError);
}

}  // namespace
}  // namespace viewflow
