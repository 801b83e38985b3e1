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

#include "hoadoa/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hoadoa {

namespace {

void put_u16(std::string& buf, uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i)
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint16_t get_u16(const std::string& buf, size_t at) {
  return static_cast<uint16_t>(static_cast<uint8_t>(buf[at]) |
                               (static_cast<uint8_t>(buf[at + 1]) << 8));
}

uint32_t get_u32(const std::string& buf, size_t at) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i)
    v = (v << 8) | static_cast<uint8_t>(buf[at + static_cast<size_t>(i)]);
  return v;
}

}  // namespace

void write_wav(const std::string& path,
               const std::vector<std::vector<double>>& channels,
               double sample_rate) {
  if (channels.empty()) throw std::invalid_argument("write_wav: no channels");
  const size_t frames = channels[0].size();
  for (const auto& c : channels)
    if (c.size() != frames)
      throw std::invalid_argument("write_wav: ragged channels");

  const auto num_channels = static_cast<uint16_t>(channels.size());
  const auto rate = static_cast<uint32_t>(std::llround(sample_rate));
  const uint16_t block_align = static_cast<uint16_t>(num_channels * 4);
  const auto data_size = static_cast<uint32_t>(frames * num_channels * 4);

  std::string buf;
  buf.reserve(58 + data_size);
  buf += "RIFF";
  put_u32(buf, 4 + 24 + 12 + 8 + data_size);
  buf += "WAVE";
  buf += "fmt ";
  put_u32(buf, 16);
  put_u16(buf, 3);  // IEEE float
  put_u16(buf, num_channels);
  put_u32(buf, rate);
  put_u32(buf, rate * block_align);
  put_u16(buf, block_align);
  put_u16(buf, 32);
  buf += "fact";  // required for non-PCM formats
  put_u32(buf, 4);
  put_u32(buf, static_cast<uint32_t>(frames));
  buf += "data";
  put_u32(buf, data_size);
  for (size_t i = 0; i < frames; ++i)
    for (const auto& c : channels)
      put_u32(buf, std::bit_cast<uint32_t>(static_cast<float>(c[i])));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_wav: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_wav: write failed " + path);
}

void write_wav(const std::string& path, const HoaSignal& signal) {
  write_wav(path, signal.channels, signal.sample_rate);
}

std::vector<std::vector<double>> read_wav(const std::string& path,
                                          double* sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 44 || buf.compare(0, 4, "RIFF") != 0 ||
      buf.compare(8, 4, "WAVE") != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, num_channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_at = 0, data_size = 0;
  bool have_fmt = false;
  size_t at = 12;
  while (at + 8 <= buf.size()) {
    const std::string id = buf.substr(at, 4);
    const uint32_t size = get_u32(buf, at + 4);
    const size_t body = at + 8;
    if (body + size > buf.size())
      throw std::runtime_error("read_wav: truncated chunk in " + path);
    if (id == "fmt " && size >= 16) {
      format = get_u16(buf, body);
      num_channels = get_u16(buf, body + 2);
      rate = get_u32(buf, body + 4);
      bits = get_u16(buf, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      data_at = body;
      data_size = size;
    }
    at = body + size + (size & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data_at == 0)
    throw std::runtime_error("read_wav: missing fmt or data chunk: " + path);
  if (num_channels == 0)
    throw std::runtime_error("read_wav: zero channels: " + path);

  const bool is_float = format == 3 && bits == 32;
  const bool is_pcm16 = format == 1 && bits == 16;
  if (!is_float && !is_pcm16)
    throw std::runtime_error("read_wav: unsupported sample format: " + path);

  const size_t bytes_per = is_float ? 4 : 2;
  const size_t frames = data_size / (bytes_per * num_channels);
  std::vector<std::vector<double>> channels(
      num_channels, std::vector<double>(frames, 0.0));
  for (size_t i = 0; i < frames; ++i)
    for (size_t c = 0; c < num_channels; ++c) {
      const size_t p = data_at + (i * num_channels + c) * bytes_per;
      if (is_float) {
        channels[c][i] = std::bit_cast<float>(get_u32(buf, p));
      } else {
        const auto raw = static_cast<int16_t>(get_u16(buf, p));
        channels[c][i] = static_cast<double>(raw) / 32768.0;
      }
    }
  if (sample_rate) *sample_rate = static_cast<double>(rate);
  return channels;
}

HoaSignal read_wav_hoa(const std::string& path) {
  HoaSignal s;
  s.channels = read_wav(path, &s.sample_rate);
  const auto nc = s.channels.size();
  int order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nc)))) - 1;
  if (order < 1 || static_cast<size_t>((order + 1) * (order + 1)) != nc)
    throw std::runtime_error("read_wav_hoa: channel count is not (order+1)^2");
  s.order = order;
  return s;
}

}  // namespace hoadoa
