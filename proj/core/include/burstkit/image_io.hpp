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
#include <string>
#include <vector>

#include "burstkit/tensor.hpp"

namespace burstkit {

/// Reads an 8- or 16-bit PNG (gray, gray+alpha, RGB or RGBA) as a
/// (1, 3, H, W) tensor in [0, 1]. Alpha is dropped.
Tensor<float> read_png(const std::filesystem::path& path);

/// Writes a (1, 3, H, W) or (1, 1, H, W) tensor as 8-bit PNG, clamping to [0, 1].
void write_png(const std::filesystem::path& path, const Tensor<float>& image);

/// Writes 8-bit grayscale pixels (row-major, width x height).
void write_png_gray(const std::filesystem::path& path, std::int64_t width, std::int64_t height,
                    const std::vector<std::uint8_t>& pixels);

/// Tiles the channels of batch item `index` into a near-square grid, each
/// channel min-max normalized to 0..255 independently. Returns the pixels and
/// writes the grid extent into width/height.
template <class T>
std::vector<std::uint8_t> feature_grid(const Tensor<T>& features, std::int64_t index,
                                       std::int64_t& width, std::int64_t& height);

/// Feature-dump hook: writes `<dir>/<name>.bkt` plus one grayscale grid PNG
/// per batch item (`<name>_b<i>.png`). Returns the paths written.
template <class T>
std::vector<std::filesystem::path> dump_feature(const std::filesystem::path& dir,
                                                const std::string& name,
                                                const Tensor<T>& features);

}  // namespace burstkit
