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

#include "hoadoa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "hoadoa/dsp.hpp"
#include "hoadoa/room.hpp"
#include "hoadoa/wav.hpp"

namespace fs = std::filesystem;
using namespace hoadoa;

namespace {

double rms(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return std::sqrt(p / static_cast<double>(x.size()));
}

double crest_factor(const std::vector<double>& x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak / rms(x);
}

double channel0_power(const HoaSignal& s) {
  double p = 0.0;
  for (double v : s.channels[0]) p += v * v;
  return p;
}

// Small dead rooms keep the image-source enumeration cheap in tests.
SceneBounds fast_bounds() {
  SceneBounds b;
  b.min_xy = 4.0;
  b.max_xy = 6.0;
  b.min_z = 3.0;
  b.max_z = 3.5;
  b.absorption_min = 0.6;
  b.absorption_max = 0.9;
  return b;
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

// Relative path -> content for every regular file under root.
std::map<std::string, std::vector<char>> tree_bytes(const fs::path& root) {
  std::map<std::string, std::vector<char>> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).string()] = file_bytes(entry.path());
  }
  return out;
}

}  // namespace

TEST_CASE("split names round trip") {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    CHECK(split_from_name(split_name(s)) == s);
  CHECK_THROWS_AS(split_from_name("dev"), std::invalid_argument);
}

TEST_CASE("sample_scene is deterministic and scenes share their room") {
  const SceneBounds bounds;
  const SceneSpec a = sample_scene(7, 12, bounds);
  const SceneSpec b = sample_scene(7, 12, bounds);
  CHECK(a.scene_id == "r0001_s04");
  CHECK(a.seed == b.seed);
  CHECK(a.room.dims.x == b.room.dims.x);
  CHECK(a.source.x == b.source.x);
  CHECK(a.snr_db == b.snr_db);
  CHECK(a.doa_label == b.doa_label);

  // Indices 8..15 live in room 1: same geometry draw, distinct sources.
  const SceneSpec c = sample_scene(7, 8, bounds);
  CHECK(c.room.dims.x == a.room.dims.x);
  CHECK(c.room.absorption == a.room.absorption);
  CHECK(c.receiver.x == a.receiver.x);
  CHECK(c.source.x != a.source.x);
  CHECK(c.seed != a.seed);

  const SceneSpec d = sample_scene(8, 12, bounds);
  CHECK(d.room.dims.x != a.room.dims.x);

  CHECK_THROWS_AS(sample_scene(7, 12, bounds, 0), std::invalid_argument);
  SceneBounds bad;
  bad.max_xy = 2.0;  // below min_xy
  CHECK_THROWS_AS(sample_scene(7, 12, bad), std::invalid_argument);
  SceneBounds tight;
  tight.min_xy = tight.max_xy = 3.0;
  tight.min_z = tight.max_z = 3.0;
  tight.receiver_wall_margin = 1.6;  // 2 * 1.6 > 3
  CHECK_THROWS_AS(sample_scene(7, 12, tight), std::runtime_error);
}

TEST_CASE("sampled scenes satisfy every placement constraint") {
  const SceneBounds b;
  for (size_t i = 0; i < 10000; ++i) {
    const SceneSpec s = sample_scene(3, i, b);
    const double dims[3] = {s.room.dims.x, s.room.dims.y, s.room.dims.z};
    const double recv[3] = {s.receiver.x, s.receiver.y, s.receiver.z};
    const double src[3] = {s.source.x, s.source.y, s.source.z};
    REQUIRE(dims[0] >= b.min_xy);
    REQUIRE(dims[0] <= b.max_xy);
    REQUIRE(dims[1] >= b.min_xy);
    REQUIRE(dims[1] <= b.max_xy);
    REQUIRE(dims[2] >= b.min_z);
    REQUIRE(dims[2] <= b.max_z);
    for (double a : s.room.absorption) {
      REQUIRE(a >= b.absorption_min);
      REQUIRE(a <= b.absorption_max);
    }
    for (int a = 0; a < 3; ++a) {
      REQUIRE(recv[a] >= b.receiver_wall_margin - 1e-12);
      REQUIRE(recv[a] <= dims[a] - b.receiver_wall_margin + 1e-12);
      REQUIRE(src[a] >= b.source_wall_margin - 1e-9);
      REQUIRE(src[a] <= dims[a] - b.source_wall_margin + 1e-9);
    }
    const Vec3 delta = s.source - s.receiver;
    REQUIRE(norm(delta) >= b.min_source_receiver_dist - 1e-9);
    REQUIRE(std::abs(norm(delta) - s.distance) < 1e-9);
    REQUIRE(angular_distance(Direction::from_unit_vector(delta),
                             s.doa_label) < 1e-9);
    REQUIRE(s.snr_db >= b.snr_min);
    REQUIRE(s.snr_db <= b.snr_max);
  }
}

TEST_CASE("DOA labels are uniform on the sphere") {
  const SceneBounds b;
  Vec3 sum{};
  const size_t n = 50000;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 u = sample_scene(99, i, b).doa_label.unit_vector();
    sum = sum + u;
  }
  // The mean of n uniform unit vectors concentrates near 0 at rate
  // 1/sqrt(n) ~ 0.0045; a directional sampling bias would not shrink.
  CHECK(norm((1.0 / static_cast<double>(n)) * sum) < 0.02);
}

TEST_CASE("speech surrogate is deterministic with pinned RMS") {
  const std::vector<double> s = speech_surrogate(42, 4.0, 16000.0);
  REQUIRE(s.size() == 64000);
  CHECK(rms(s) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(s == speech_surrogate(42, 4.0, 16000.0));
  CHECK(s != speech_surrogate(43, 4.0, 16000.0));

  // Pauses: a real fraction of exact zeros, but far from all-silence.
  const size_t zeros = std::count(s.begin(), s.end(), 0.0);
  CHECK(zeros > s.size() / 20);
  CHECK(zeros < (s.size() * 7) / 10);
  // Bursty waveform: crest factor well above a steady tone's sqrt(2).
  CHECK(crest_factor(s) > 2.5);

  CHECK_THROWS_AS(speech_surrogate(1, 0.0, 16000.0), std::invalid_argument);
  CHECK_THROWS_AS(speech_surrogate(1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("surrogate modulation spectrum is dominated by syllabic rates") {
  const double rate = 16000.0;
  const std::vector<double> s = speech_surrogate(7, 4.0, rate);
  // Rectify and remove the mean; the strongest remaining line must sit
  // below 10 Hz if the envelope, not the carrier, drives the modulation.
  std::vector<std::complex<double>> buf(65536);
  double mean = 0.0;
  for (double v : s) mean += std::abs(v);
  mean /= static_cast<double>(s.size());
  for (size_t i = 0; i < s.size(); ++i) buf[i] = std::abs(s[i]) - mean;
  fft_pow2(buf, false);
  size_t peak_bin = 1;
  for (size_t k = 1; k < buf.size() / 2; ++k)
    if (std::abs(buf[k]) > std::abs(buf[peak_bin])) peak_bin = k;
  const double peak_hz =
      static_cast<double>(peak_bin) * rate / static_cast<double>(buf.size());
  CHECK(peak_hz < 10.0);
  CHECK(peak_hz > 0.1);
}

TEST_CASE("babble sums exactly fifty talkers") {
  std::vector<uint64_t> seeds(50);
  for (size_t k = 0; k < seeds.size(); ++k) seeds[k] = 1000 + k;
  const std::vector<double> babble = babble_noise(seeds, 2.0, 16000.0);
  REQUIRE(babble.size() == 32000);
  CHECK(rms(babble) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(babble == babble_noise(seeds, 2.0, 16000.0));

  // Superposing independent talkers fills the pauses, so babble is less
  // peaky than any single voice.
  const std::vector<double> one = speech_surrogate(seeds[0], 2.0, 16000.0);
  CHECK(crest_factor(babble) < crest_factor(one));

  seeds.pop_back();
  CHECK_THROWS_AS(babble_noise(seeds, 2.0, 16000.0), std::invalid_argument);
  CHECK_THROWS_AS(babble_noise({}, 2.0, 16000.0), std::invalid_argument);
}

TEST_CASE("synth_scene renders deterministic one-second segments") {
  const SceneBounds bounds = fast_bounds();
  SplitConfig cfg;
  cfg.bounds = bounds;
  cfg.order = 2;
  cfg.speech_seconds = 2.0;
  cfg.babble_seconds = 1.0;
  cfg.debug_components = true;

  const SceneSpec spec = sample_scene(11, 3, bounds);
  const SceneAudio audio = synth_scene(spec, cfg);

  REQUIRE(!audio.sequences.empty());
  for (const HoaSignal& seq : audio.sequences) {
    CHECK(seq.order == 2);
    CHECK(seq.num_channels() == 9);
    CHECK(seq.length() == 16000);
    CHECK(seq.sample_rate == 16000.0);
    CHECK(seq.valid());
  }
  CHECK(angular_distance(audio.label, spec.doa_label) < 1e-9);

  // Segment count follows from the pipeline lengths alone.
  const size_t len48 = static_cast<size_t>(std::llround(
      (std::min(sabine_t60(spec.room), 1.25) + 0.05) * 48000.0));
  const size_t mixture_n = 32000 + (len48 + 2) / 3 - 1;
  CHECK(audio.sequences.size() == mixture_n / 16000);

  // Debug components rebuild the mixture and carry the declared SNR.
  REQUIRE(audio.primary.length() == mixture_n);
  REQUIRE(audio.scaled_noise.length() == mixture_n);
  const double measured = 10.0 * std::log10(channel0_power(audio.primary) /
                                            channel0_power(audio.scaled_noise));
  CHECK(measured == doctest::Approx(spec.snr_db).epsilon(1e-9));

  const SceneAudio again = synth_scene(spec, cfg);
  REQUIRE(again.sequences.size() == audio.sequences.size());
  for (size_t k = 0; k < again.sequences.size(); ++k)
    CHECK(again.sequences[k].channels == audio.sequences[k].channels);
}

TEST_CASE("synth_split output is resumable and worker-count independent") {
  const fs::path base_a = fs::temp_directory_path() / "hoadoa_split_a";
  const fs::path base_b = fs::temp_directory_path() / "hoadoa_split_b";
  fs::remove_all(base_a);
  fs::remove_all(base_b);

  SplitConfig cfg;
  cfg.split = Split::kVal;
  cfg.bounds = fast_bounds();
  cfg.room_count = 2;
  cfg.sources_per_room = 2;
  cfg.order = 1;
  cfg.master_seed = 5;
  cfg.speech_seconds = 2.0;
  cfg.babble_seconds = 1.0;
  cfg.write_features = true;
  cfg.debug_components = true;
  cfg.out_dir = base_a.string();
  cfg.workers = 2;

  const SynthReport report = synth_split(cfg);
  CHECK(report.errors.empty());
  REQUIRE(report.manifest.scenes.size() == 4);
  for (const SceneSpec& s : report.manifest.scenes) {
    CHECK(!s.sequence_files.empty());
    CHECK(s.feature_files.size() == s.sequence_files.size());
    CHECK(!s.srir_file.empty());
  }

  // Same config, one worker, second directory: byte-identical tree.
  cfg.out_dir = base_b.string();
  cfg.workers = 1;
  const SynthReport report_b = synth_split(cfg);
  CHECK(report_b.errors.empty());
  const auto tree_a = tree_bytes(base_a);
  const auto tree_b = tree_bytes(base_b);
  REQUIRE(tree_a.size() == tree_b.size());
  for (const auto& [name, bytes] : tree_a) {
    REQUIRE(tree_b.count(name) == 1);
    CHECK_MESSAGE(tree_b.at(name) == bytes, name);
  }

  // Manifest round trip and validation.
  const Manifest man = read_manifest((base_a / "manifest.json").string());
  CHECK(man.split == Split::kVal);
  CHECK(man.order == 1);
  CHECK(man.master_seed == 5);
  CHECK(man.room_count == 2);
  CHECK(man.sources_per_room == 2);
  REQUIRE(man.scenes.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    const SceneSpec& orig = report.manifest.scenes[i];
    const SceneSpec& got = man.scenes[i];
    CHECK(got.scene_id == orig.scene_id);
    CHECK(got.seed == orig.seed);
    CHECK(got.room.dims.x == orig.room.dims.x);
    CHECK(got.room.absorption == orig.room.absorption);
    CHECK(got.receiver.z == orig.receiver.z);
    CHECK(got.source.y == orig.source.y);
    CHECK(got.distance == orig.distance);
    CHECK(got.snr_db == orig.snr_db);
    // Angles pass through a 6-decimal-degree quantization.
    CHECK(angular_distance(got.doa_label, orig.doa_label) < 1e-7);
    CHECK(got.sequence_files == orig.sequence_files);
    CHECK(got.feature_files == orig.feature_files);
    CHECK(got.srir_file == orig.srir_file);
  }
  CHECK(validate_manifest(man, cfg.bounds, base_a.string(), true).empty());

  Manifest tampered = man;
  tampered.scenes[2].snr_db = 99.0;
  tampered.scenes[1].source.x += 0.5;
  const auto problems =
      validate_manifest(tampered, cfg.bounds, base_a.string(), true);
  CHECK(problems.size() >= 2);

  // Resume semantics: existing files are never rewritten. Corrupt one
  // sequence file in place, rerun, and the corruption must survive.
  const fs::path victim = base_a / man.scenes[0].sequence_files[0];
  {
    std::ofstream out(victim, std::ios::binary | std::ios::trunc);
    out << "corrupt";
  }
  cfg.out_dir = base_a.string();
  cfg.workers = 2;
  const SynthReport resumed = synth_split(cfg);
  CHECK(resumed.errors.empty());
  CHECK(file_bytes(victim) == std::vector<char>{'c', 'o', 'r', 'r', 'u',
                                                'p', 't'});

  // A deleted file is regenerated byte-identically on the next run.
  fs::remove(victim);
  const SynthReport repaired = synth_split(cfg);
  CHECK(repaired.errors.empty());
  CHECK(file_bytes(victim) ==
        file_bytes(base_b / man.scenes[0].sequence_files[0]));

  // Manifest bytes are stable across reruns.
  CHECK(file_bytes(base_a / "manifest.json") ==
        file_bytes(base_b / "manifest.json"));

  fs::remove_all(base_a);
  fs::remove_all(base_b);
}

TEST_CASE("manifest IO rejects malformed input") {
  CHECK_THROWS_AS(read_manifest("/nonexistent/manifest.json"),
                  std::runtime_error);
  const fs::path bad = fs::temp_directory_path() / "hoadoa_bad_manifest.json";
  {
    std::ofstream out(bad);
    out << "this is not json";
  }
  CHECK_THROWS_AS(read_manifest(bad.string()), std::runtime_error);
  {
    std::ofstream out(bad, std::ios::trunc);
    out << "{\"format\": \"something-else\", \"version\": 1}";
  }
  CHECK_THROWS_AS(read_manifest(bad.string()), std::runtime_error);
  fs::remove(bad);

  SplitConfig cfg;
  cfg.out_dir = "";
  CHECK_THROWS_AS(synth_split(cfg), std::invalid_argument);
  cfg.out_dir = "x";
  cfg.order = 9;
  CHECK_THROWS_AS(synth_split(cfg), std::invalid_argument);
  cfg.order = 2;
  cfg.workers = 0;
  CHECK_THROWS_AS(synth_split(cfg), std::invalid_argument);
}
