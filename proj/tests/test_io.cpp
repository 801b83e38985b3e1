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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "hoadoa/rng.hpp"
#include "hoadoa/tensor_file.hpp"
#include "hoadoa/wav.hpp"

using namespace hoadoa;

namespace {

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("wav round trip preserves float32 samples and layout") {
  Rng rng(1);
  std::vector<std::vector<double>> chans(3, std::vector<double>(777));
  for (auto& c : chans)
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);

  FileGuard g{temp_path("hoadoa_io_rt.wav")};
  write_wav(g.path, chans, 16000.0);
  double rate = 0.0;
  auto back = read_wav(g.path, &rate);
  CHECK(rate == 16000.0);
  REQUIRE(back.size() == 3);
  for (size_t c = 0; c < 3; ++c) {
    REQUIRE(back[c].size() == 777);
    for (size_t i = 0; i < 777; ++i)
      CHECK(back[c][i] == static_cast<double>(static_cast<float>(chans[c][i])));
  }
}

TEST_CASE("wav writer emits canonical float32 RIFF bytes") {
  FileGuard g{temp_path("hoadoa_io_bytes.wav")};
  write_wav(g.path, {{1.0, -0.5}}, 48000.0);

  std::ifstream in(g.path, std::ios::binary);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  REQUIRE(buf.size() == 56 + 8);
  CHECK(buf.substr(0, 4) == "RIFF");
  CHECK(buf.substr(8, 4) == "WAVE");
  CHECK(buf.substr(12, 4) == "fmt ");
  CHECK(static_cast<uint8_t>(buf[20]) == 3);  // IEEE float tag
  CHECK(buf.substr(36, 4) == "fact");
  CHECK(buf.substr(48, 4) == "data");
  // 1.0f little-endian = 00 00 80 3F
  CHECK(static_cast<uint8_t>(buf[56]) == 0x00);
  CHECK(static_cast<uint8_t>(buf[57]) == 0x00);
  CHECK(static_cast<uint8_t>(buf[58]) == 0x80);
  CHECK(static_cast<uint8_t>(buf[59]) == 0x3F);
}

TEST_CASE("wav writer is byte deterministic") {
  Rng rng(7);
  std::vector<std::vector<double>> chans(4, std::vector<double>(500));
  for (auto& c : chans)
    for (auto& v : c) v = rng.normal();
  FileGuard g1{temp_path("hoadoa_io_d1.wav")};
  FileGuard g2{temp_path("hoadoa_io_d2.wav")};
  write_wav(g1.path, chans, 48000.0);
  write_wav(g2.path, chans, 48000.0);
  std::ifstream a(g1.path, std::ios::binary), b(g2.path, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)),
                 std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)),
                 std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("wav reader accepts PCM16 for corpus ingestion") {
  // Hand-build a 2-sample mono PCM16 file: values 16384 (-> 0.5), -32768.
  std::string buf;
  auto u16 = [&](uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>(v >> 8));
  };
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  buf += "RIFF";
  u32(36 + 4);
  buf += "WAVE";
  buf += "fmt ";
  u32(16);
  u16(1);  // PCM
  u16(1);
  u32(16000);
  u32(32000);
  u16(2);
  u16(16);
  buf += "data";
  u32(4);
  u16(16384);
  u16(static_cast<uint16_t>(-32768));

  FileGuard g{temp_path("hoadoa_io_pcm.wav")};
  {
    std::ofstream out(g.path, std::ios::binary);
    out << buf;
  }
  double rate = 0.0;
  auto chans = read_wav(g.path, &rate);
  REQUIRE(chans.size() == 1);
  REQUIRE(chans[0].size() == 2);
  CHECK(chans[0][0] == 0.5);
  CHECK(chans[0][1] == -1.0);
}

TEST_CASE("wav reader rejects garbage") {
  FileGuard g{temp_path("hoadoa_io_bad.wav")};
  {
    std::ofstream out(g.path, std::ios::binary);
    out << "definitely not a wav file";
  }
  double rate;
  CHECK_THROWS_AS(read_wav(g.path, &rate), std::runtime_error);
  CHECK_THROWS_AS(read_wav(temp_path("hoadoa_io_missing.wav"), &rate),
                  std::runtime_error);
}

TEST_CASE("hoa wav round trip keeps order") {
  HoaSignal s = HoaSignal::zeros(2, 48000.0, 100);
  Rng rng(3);
  for (auto& c : s.channels)
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
  FileGuard g{temp_path("hoadoa_io_hoa.wav")};
  write_wav(g.path, s);
  auto back = read_wav_hoa(g.path);
  CHECK(back.order == 2);
  CHECK(back.sample_rate == 48000.0);
  CHECK(back.num_channels() == 9);
}

TEST_CASE("tensor file round trip and header layout") {
  TensorData t;
  t.dims = {2, 3, 4};
  t.data.resize(24);
  for (size_t i = 0; i < 24; ++i) t.data[i] = static_cast<float>(i) * 0.25f;

  FileGuard g{temp_path("hoadoa_io_t.hoat")};
  write_tensor(g.path, t);
  auto back = read_tensor(g.path);
  CHECK(back.dims == t.dims);
  CHECK(back.data == t.data);

  std::ifstream in(g.path, std::ios::binary);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  REQUIRE(buf.size() == 8 + 12 + 96);
  CHECK(buf.substr(0, 4) == "HOAT");
  CHECK(buf[4] == 1);
  CHECK(buf[5] == 0);
  CHECK(buf[6] == 3);
  CHECK(buf[7] == 0);
  CHECK(static_cast<uint8_t>(buf[8]) == 2);  // first dim, LE
}

TEST_CASE("tensor file validates dims against payload") {
  TensorData t;
  t.dims = {4, 4};
  t.data.resize(15);
  FileGuard g{temp_path("hoadoa_io_t2.hoat")};
  CHECK_THROWS_AS(write_tensor(g.path, t), std::invalid_argument);

  t.data.resize(16);
  write_tensor(g.path, t);
  // Truncate the payload and expect a parse failure.
  std::filesystem::resize_file(g.path, 40);
  CHECK_THROWS_AS(read_tensor(g.path), std::runtime_error);
}

TEST_CASE("feature tensor writes frames bins channels dims") {
  FeatureTensor f;
  f.frames = 5;
  f.bins = 7;
  f.channels = 6;
  f.data.assign(5 * 7 * 6, 0.5);
  FileGuard g{temp_path("hoadoa_io_t3.hoat")};
  write_tensor(g.path, f);
  auto back = read_tensor(g.path);
  CHECK(back.dims == std::vector<uint32_t>{5, 7, 6});
  CHECK(back.data[0] == 0.5f);
}
