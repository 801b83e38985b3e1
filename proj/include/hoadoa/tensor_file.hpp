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
//
// Tensor container: magic "HOAT", version byte 1, dtype byte 0 (float32
// LE), ndim byte, one pad byte, ndim unsigned 32-bit LE dims, then
// row-major data. Feature tensors use the dim order (frames, bins,
// channels).

#ifndef HOADOA_TENSOR_FILE_HPP_
#define HOADOA_TENSOR_FILE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hoadoa/features.hpp"

namespace hoadoa {

struct TensorData {
  std::vector<uint32_t> dims;
  std::vector<float> data;

  size_t element_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

// Throws std::invalid_argument if dims and data disagree, std::runtime_error
// on I/O failure.
void write_tensor(const std::string& path, const TensorData& tensor);
void write_tensor(const std::string& path, const FeatureTensor& tensor);

// Throws std::runtime_error on malformed files.
TensorData read_tensor(const std::string& path);

}  // namespace hoadoa

#endif  // HOADOA_TENSOR_FILE_HPP_
