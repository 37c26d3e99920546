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

#include "burstkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "burstkit/tensor_io.hpp"

namespace burstkit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

void write_png_raw(const std::filesystem::path& path, std::int64_t width, std::int64_t height,
                   int color_type, int channels, const std::vector<std::uint8_t>& pixels) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::int64_t y = 0; y < height; ++y) {
    png_write_row(png, pixels.data() + y * width * channels);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::uint8_t to_byte(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

Tensor<float> read_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failed reading " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  const auto width = static_cast<std::int64_t>(png_get_image_width(png, info));
  const auto height = static_cast<std::int64_t>(png_get_image_height(png, info));
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> buffer(rowbytes * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (std::int64_t y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Tensor<float> out(Shape{1, 3, height, width});
  const std::int64_t plane = height * width;
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v;
        if (out_depth == 16) {
          std::uint16_t raw;
          std::memcpy(&raw, rows[y] + (x * 3 + c) * 2, 2);
          v = static_cast<float>(raw) / 65535.0f;
        } else {
          v = static_cast<float>(rows[y][x * 3 + c]) / 255.0f;
        }
        out.ptr()[c * plane + y * width + x] = v;
      }
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Tensor<float>& image) {
  const Shape s = image.shape();
  if (s.n != 1 || (s.c != 3 && s.c != 1)) {
    throw DimensionError("write_png expects (1, 3|1, H, W), got " + s.str());
  }
  const std::int64_t plane = s.plane();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(plane * s.c));
  for (std::int64_t p = 0; p < plane; ++p) {
    for (std::int64_t c = 0; c < s.c; ++c) px[p * s.c + c] = to_byte(image.ptr()[c * plane + p]);
  }
  write_png_raw(path, s.w, s.h, s.c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                static_cast<int>(s.c), px);
}

void write_png_gray(const std::filesystem::path& path, std::int64_t width, std::int64_t height,
                    const std::vector<std::uint8_t>& pixels) {
  if (static_cast<std::int64_t>(pixels.size()) != width * height) {
    throw DimensionError("write_png_gray: pixel count mismatch");
  }
  write_png_raw(path, width, height, PNG_COLOR_TYPE_GRAY, 1, pixels);
}

template <class T>
std::vector<std::uint8_t> feature_grid(const Tensor<T>& features, std::int64_t index,
                                       std::int64_t& width, std::int64_t& height) {
  const Shape s = features.shape();
  if (index < 0 || index >= s.n) throw ContractError("feature_grid: batch index out of range");
  const auto cols = static_cast<std::int64_t>(std::ceil(std::sqrt(double(s.c))));
  const std::int64_t rows = (s.c + cols - 1) / cols;
  constexpr std::int64_t gap = 1;
  width = cols * s.w + (cols - 1) * gap;
  height = rows * s.h + (rows - 1) * gap;
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width * height), 0);
  const std::int64_t plane = s.plane();
  for (std::int64_t c = 0; c < s.c; ++c) {
    const T* src = features.ptr() + (index * s.c + c) * plane;
    const auto [lo, hi] = std::minmax_element(src, src + plane);
    const double range = double(*hi) - double(*lo);
    const std::int64_t gx = (c % cols) * (s.w + gap);
    const std::int64_t gy = (c / cols) * (s.h + gap);
    for (std::int64_t y = 0; y < s.h; ++y) {
      for (std::int64_t x = 0; x < s.w; ++x) {
        const double v = range > 0 ? (double(src[y * s.w + x]) - double(*lo)) / range : 0.0;
        px[(gy + y) * width + gx + x] = to_byte(v);
      }
    }
  }
  return px;
}

template <class T>
std::vector<std::filesystem::path> dump_feature(const std::filesystem::path& dir,
                                                const std::string& name,
                                                const Tensor<T>& features) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto tensor_path = dir / (name + ".bkt");
  write_tensor(tensor_path, features);
  written.push_back(tensor_path);
  for (std::int64_t b = 0; b < features.shape().n; ++b) {
    std::int64_t w = 0;
    std::int64_t h = 0;
    const auto px = feature_grid(features, b, w, h);
    const auto png_path = dir / (name + "_b" + std::to_string(b) + ".png");
    write_png_gray(png_path, w, h, px);
    written.push_back(png_path);
  }
  return written;
}

template std::vector<std::uint8_t> feature_grid(const Tensor<float>&, std::int64_t,
                                                std::int64_t&, std::int64_t&);
template std::vector<std::uint8_t> feature_grid(const Tensor<double>&, std::int64_t,
                                                std::int64_t&, std::int64_t&);
template std::vector<std::filesystem::path> dump_feature(const std::filesystem::path&,
                                                         const std::string&,
                                                         const Tensor<float>&);
template std::vector<std::filesystem::path> dump_feature(const std::filesystem::path&,
                                                         const std::string&,
                                                         const Tensor<double>&);

}  // namespace burstkit
