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

#include "burstkit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace burstkit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; add byte swapping for this host");

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("tensor file truncated in header");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

template <class T>
constexpr DType dtype_of() {
  return sizeof(T) == 4 ? DType::f32 : DType::f64;
}

template <class Src, class T>
void read_payload(std::istream& is, std::vector<T>& out, std::size_t count) {
  std::vector<Src> raw(count);
  if (!is.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(count * sizeof(Src)))) {
    throw IoError("tensor file truncated in payload");
  }
  out.assign(raw.begin(), raw.end());
}

}  // namespace

template <class T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
  os.write(kTensorMagic, sizeof(kTensorMagic));
  put_u32(os, 4);
  const Shape s = t.shape();
  for (std::int64_t d : {s.n, s.c, s.h, s.w}) put_u32(os, static_cast<std::uint32_t>(d));
  const auto tag = static_cast<char>(dtype_of<T>());
  os.write(&tag, 1);
  os.write(reinterpret_cast<const char*>(t.ptr()),
           static_cast<std::streamsize>(t.numel() * sizeof(T)));
  if (!os) throw IoError("failed writing tensor payload");
}

template <class T>
void write_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  write_tensor(os, t);
}

template <class T>
Tensor<T> read_tensor(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kTensorMagic, 8) != 0) {
    throw IoError("not a BKTENSR1 tensor file");
  }
  const std::uint32_t rank = get_u32(is);
  if (rank == 0 || rank > 4) throw IoError("unsupported tensor rank " + std::to_string(rank));
  std::int64_t dims[4] = {1, 1, 1, 1};
  for (std::uint32_t i = 0; i < rank; ++i) dims[4 - rank + i] = get_u32(is);
  char tag = 0;
  if (!is.read(&tag, 1)) throw IoError("tensor file truncated at dtype");
  const Shape shape{dims[0], dims[1], dims[2], dims[3]};
  const auto count = static_cast<std::size_t>(shape.numel());
  std::vector<T> values;
  switch (static_cast<DType>(tag)) {
    case DType::f32:
      read_payload<float>(is, values, count);
      break;
    case DType::f64:
      read_payload<double>(is, values, count);
      break;
    default:
      throw IoError("unknown tensor dtype tag " + std::to_string(int(tag)));
  }
  return Tensor<T>(shape, std::move(values));
}

template <class T>
Tensor<T> read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open tensor file: " + path.string());
  return read_tensor<T>(is);
}

template <class T>
std::vector<std::uint8_t> encode_tensor(const Tensor<T>& t) {
  std::ostringstream os(std::ios::binary);
  write_tensor(os, t);
  const std::string s = os.str();
  return {s.begin(), s.end()};
}

#define BURSTKIT_INSTANTIATE(T)                                                  \
  template void write_tensor(std::ostream&, const Tensor<T>&);                   \
  template void write_tensor(const std::filesystem::path&, const Tensor<T>&);    \
  template Tensor<T> read_tensor<T>(std::istream&);                              \
  template Tensor<T> read_tensor<T>(const std::filesystem::path&);               \
  template std::vector<std::uint8_t> encode_tensor(const Tensor<T>&);

BURSTKIT_INSTANTIATE(float)
BURSTKIT_INSTANTIATE(double)
#undef BURSTKIT_INSTANTIATE

}  // namespace burstkit
