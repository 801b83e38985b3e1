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
// Minimal RIFF/WAVE I/O. The writer emits IEEE 32-bit float little-endian
// samples byte-for-byte deterministically; the reader additionally accepts
// 16-bit PCM so external speech corpora can be ingested.

#ifndef HOADOA_WAV_HPP_
#define HOADOA_WAV_HPP_

#include <string>
#include <vector>

#include "hoadoa/sh.hpp"

namespace hoadoa {

// Interleaves the channels and writes float32 LE. Throws std::runtime_error
// on I/O failure and std::invalid_argument on empty/ragged input.
void write_wav(const std::string& path,
               const std::vector<std::vector<double>>& channels,
               double sample_rate);
void write_wav(const std::string& path, const HoaSignal& signal);

// De-interleaves into per-channel vectors. Accepts float32 and PCM16
// (scaled by 1/32768). Throws std::runtime_error on malformed files.
std::vector<std::vector<double>> read_wav(const std::string& path,
                                          double* sample_rate);
// Same, requiring a perfect-square channel count so the order is implied.
HoaSignal read_wav_hoa(const std::string& path);

}  // namespace hoadoa

#endif  // HOADOA_WAV_HPP_
