// Copyright 2026 The hoadoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hoadoa/tensor_file.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace hoadoa {

namespace {

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i)
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& buf, size_t at) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i)
    v = (v << 8) | static_cast<uint8_t>(buf[at + static_cast<size_t>(i)]);
  return v;
}

}  // namespace

void write_tensor(const std::string& path, const TensorData& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 255)
    throw std::invalid_argument("write_tensor: bad rank");
  if (tensor.element_count() != tensor.data.size())
    throw std::invalid_argument("write_tensor: dims do not match data size");

  std::string buf;
  buf.reserve(8 + 4 * tensor.dims.size() + 4 * tensor.data.size());
  buf += "HOAT";
  buf.push_back(1);  // version
  buf.push_back(0);  // dtype float32 LE
  buf.push_back(static_cast<char>(tensor.dims.size()));
  buf.push_back(0);  // pad
  for (uint32_t d : tensor.dims) put_u32(buf, d);
  for (float v : tensor.data) put_u32(buf, std::bit_cast<uint32_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_tensor: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_tensor: write failed " + path);
}

void write_tensor(const std::string& path, const FeatureTensor& tensor) {
  TensorData t;
  t.dims = {static_cast<uint32_t>(tensor.frames),
            static_cast<uint32_t>(tensor.bins),
            static_cast<uint32_t>(tensor.channels)};
  t.data.reserve(tensor.data.size());
  for (double v : tensor.data) t.data.push_back(static_cast<float>(v));
  write_tensor(path, t);
}

TensorData read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_tensor: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 8 || buf.compare(0, 4, "HOAT") != 0)
    throw std::runtime_error("read_tensor: bad magic: " + path);
  if (buf[4] != 1) throw std::runtime_error("read_tensor: bad version");
  if (buf[5] != 0) throw std::runtime_error("read_tensor: bad dtype");
  const auto ndim = static_cast<uint8_t>(buf[6]);
  if (ndim == 0 || buf.size() < 8 + 4u * ndim)
    throw std::runtime_error("read_tensor: truncated header: " + path);

  TensorData t;
  t.dims.resize(ndim);
  for (uint8_t i = 0; i < ndim; ++i) t.dims[i] = get_u32(buf, 8 + 4u * i);
  const size_t count = t.element_count();
  const size_t body = 8 + 4u * ndim;
  if (buf.size() != body + 4 * count)
    throw std::runtime_error("read_tensor: payload size mismatch: " + path);
  t.data.resize(count);
  for (size_t i = 0; i < count; ++i)
    t.data[i] = std::bit_cast<float>(get_u32(buf, body + 4 * i));
  return t;
}

}  // namespace hoadoa
