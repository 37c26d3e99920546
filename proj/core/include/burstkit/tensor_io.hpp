// Copyright 2026 The burstkit Authors. All Rights Reserved.
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
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "burstkit/tensor.hpp"

namespace burstkit {

/// Binary tensor container:
///   8-byte magic "BKTENSR1" | u32 rank | rank x u32 dims | u8 dtype | payload
/// All integers little-endian; dtype 0 = f32, 1 = f64; payload row-major.
/// Tensors are always written with rank 4 (N, C, H, W). Lower-rank files are
/// read by left-padding their dims with ones.
enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

inline constexpr char kTensorMagic[8] = {'B', 'K', 'T', 'E', 'N', 'S', 'R', '1'};

template <class T>
void write_tensor(std::ostream& os, const Tensor<T>& t);
template <class T>
void write_tensor(const std::filesystem::path& path, const Tensor<T>& t);

/// Reads either dtype and converts to T.
template <class T>
Tensor<T> read_tensor(std::istream& is);
template <class T>
Tensor<T> read_tensor(const std::filesystem::path& path);

/// Serialized bytes of a tensor (used for hashing and byte-equality checks).
template <class T>
std::vector<std::uint8_t> encode_tensor(const Tensor<T>& t);

}  // namespace burstkit
