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
// Reproducible scene sampling and the synthesis pipeline: room and
// geometry draws, the synthetic speech surrogate and babble noise, scene
// rendering, and split/manifest I/O.

#ifndef HOADOA_DATASET_HPP_
#define HOADOA_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hoadoa/features.hpp"
#include "hoadoa/room.hpp"
#include "hoadoa/sh.hpp"

namespace hoadoa {

enum class Split { kTrain, kVal, kTest };
const char* split_name(Split split);
Split split_from_name(const std::string& name);

// Sampling bounds and placement constraints for scene generation.
struct SceneBounds {
  double min_xy = 3.0, max_xy = 20.0;  // room floor dims
  double min_z = 3.0, max_z = 5.0;     // room height
  double absorption_min = 0.1, absorption_max = 0.9;
  double receiver_wall_margin = 1.5;
  double source_wall_margin = 0.49;
  double min_source_receiver_dist = 1.0;
  double snr_min = 0.0, snr_max = 20.0;
};

struct SceneSpec {
  std::string scene_id;
  RoomSpec room;
  Vec3 receiver;
  Vec3 source;
  Direction doa_label;
  double distance = 0.0;  // source-receiver, meters
  double snr_db = 0.0;
  uint64_t seed = 0;  // per-scene stream seed
  Split split = Split::kTrain;
  std::string srir_file;
  std::vector<std::string> sequence_files;
  std::vector<std::string> feature_files;
};

struct SplitConfig {
  Split split = Split::kTrain;
  size_t room_count = 20;
  size_t sources_per_room = 8;
  double segment_seconds = 1.0;
  int order = 4;
  uint64_t master_seed = 0;
  SceneBounds bounds;
  std::string out_dir;
  int workers = 1;
  double speech_seconds = 4.0;   // surrogate sentence length
  double babble_seconds = 2.0;   // babble bed length (looped while mixing)
  bool write_srir = true;
  bool write_features = false;
  FeatureKind feature_kind = FeatureKind::kIntensity;
  // Also persist the wet speech and the scaled noise track per scene so
  // the declared SNR can be re-measured from files.
  bool debug_components = false;
};

// Scenes in the same room (index / sources_per_room) share the room draw
// and receiver; source, DOA, distance, and SNR are per-scene. The DOA is
// drawn uniformly on the sphere first, then the source is placed along
// that ray at a distance uniform in [min dist, max admissible]. Fully
// deterministic in (master_seed, scene_index). Throws std::runtime_error
// when the bounds make placement infeasible.
SceneSpec sample_scene(uint64_t master_seed, size_t scene_index,
                       const SceneBounds& bounds,
                       size_t sources_per_room = 8);

// Pink-ish noise under a random syllabic (2-8 Hz) envelope with pauses,
// RMS-normalized to 0.1. Deterministic per seed.
std::vector<double> speech_surrogate(uint64_t seed, double duration,
                                     double rate);

// Sum of exactly 50 surrogate sentences at random circular offsets,
// RMS-normalized to 0.1. Throws unless 50 seeds are given.
std::vector<double> babble_noise(const std::vector<uint64_t>& seeds,
                                 double duration, double rate = 16000.0);

struct SceneAudio {
  std::vector<HoaSignal> sequences;  // segment_seconds each, 16 kHz
  Direction label;
  HoaSrir srir;            // 48 kHz, as simulated
  HoaSignal primary;       // wet speech before mixing (16 kHz)
  HoaSignal scaled_noise;  // gain-applied noise track (16 kHz)
};

// Renders one scene: SRIR at 48 kHz, resample to 16 kHz, convolve with a
// surrogate sentence, add diffuse babble at spec.snr_db, cut into
// segments. All randomness comes from spec.seed.
SceneAudio synth_scene(const SceneSpec& spec, const SplitConfig& cfg);

struct Manifest {
  Split split = Split::kTrain;
  int order = 4;
  uint64_t master_seed = 0;
  double segment_seconds = 1.0;
  double sample_rate = 16000.0;
  size_t room_count = 0;
  size_t sources_per_room = 0;
  std::vector<SceneSpec> scenes;
};

struct SynthReport {
  Manifest manifest;
  // Per-scene failures ("scene_id: what went wrong"); the batch continues.
  std::vector<std::string> errors;
};

// Generates room_count x sources_per_room scenes under cfg.out_dir,
// writing sequence WAVs (plus optional SRIRs, feature tensors, and debug
// components) and manifest.json. Scenes whose files already exist are
// skipped, so interrupted runs resume. Output bytes depend only on the
// config, never on the worker count.
SynthReport synth_split(const SplitConfig& cfg);

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

// Re-checks the geometric constraints and label consistency of every
// scene; with check_files, also verifies referenced files exist and
// re-measures the SNR from debug components when present. Returns
// human-readable violations, empty when clean.
std::vector<std::string> validate_manifest(const Manifest& manifest,
                                           const SceneBounds& bounds,
                                           const std::string& base_dir,
                                           bool check_files);

}  // namespace hoadoa

#endif  // HOADOA_DATASET_HPP_
