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

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "viewflow/error.hpp"

namespace viewflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Little-endian primitive I/O shared by the checkpoint, rep store and
// precomputed-embedding formats.
namespace binio {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw DataError("unexpected end of binary stream");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::size_t max_len = 1u << 30) {
  auto n = read_le<std::uint32_t>(in);
  if (n > max_len) throw DataError("string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("unexpected end of binary stream");
  return s;
}

}  // namespace binio

enum class DType : std::uint32_t { kFloat32 = 0, kFloat64 = 1 };

// Shape-prefixed tensor record: name, dtype, ndim, dims (u64 each), then
// row-major data. Vectors are written with ndim 1.
void write_tensor(std::ostream& out, const std::string& name, const Mat& m,
                  DType dtype, bool as_vector = false);

struct NamedTensor {
  std::string name;
  Mat value;
  bool is_vector = false;
};

NamedTensor read_tensor(std::istream& in);

}  // namespace viewflow
