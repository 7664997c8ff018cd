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

#include "viewflow/tensor_io.hpp"

namespace viewflow {

void write_tensor(std::ostream& out, const std::string& name, const Mat& m,
                  DType dtype, bool as_vector) {
  binio::write_string(out, name);
  binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  if (as_vector) {
    binio::write_le<std::uint32_t>(out, 1);
    binio::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.size()));
  } else {
    binio::write_le<std::uint32_t>(out, 2);
    binio::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    binio::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (dtype == DType::kFloat32) {
        binio::write_le<float>(out, static_cast<float>(m(r, c)));
      } else {
        binio::write_le<double>(out, m(r, c));
      }
    }
  }
}

NamedTensor read_tensor(std::istream& in) {
  NamedTensor t;
  t.name = binio::read_string(in, 4096);
  auto dtype = static_cast<DType>(binio::read_le<std::uint32_t>(in));
  if (dtype != DType::kFloat32 && dtype != DType::kFloat64) {
    throw DataError("tensor " + t.name + ": unknown dtype");
  }
  auto ndim = binio::read_le<std::uint32_t>(in);
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  if (ndim == 1) {
    rows = binio::read_le<std::uint64_t>(in);
    t.is_vector = true;
  } else if (ndim == 2) {
    rows = binio::read_le<std::uint64_t>(in);
    cols = binio::read_le<std::uint64_t>(in);
  } else {
    throw DataError("tensor " + t.name + ": unsupported rank " +
                    std::to_string(ndim));
  }
  if (rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1u << 30)) {
    throw DataError("tensor " + t.name + ": shape out of range");
  }
  t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
      t.value(r, c) = dtype == DType::kFloat32
                          ? static_cast<double>(binio::read_le<float>(in))
                          : binio::read_le<double>(in);
    }
  }
  return t;
}

}  // namespace viewflow
