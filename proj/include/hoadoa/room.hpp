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
// Shoebox image-source simulator emitting Ambisonics SRIRs, plus a
// synthetic diffuse-field SRIR. Walls carry broadband (frequency
// independent) absorption; reflections attenuate by sqrt(1 - alpha) per
// hit and arrivals are deposited with a 32-tap windowed-sinc fractional
// delay kernel.

#ifndef HOADOA_ROOM_HPP_
#define HOADOA_ROOM_HPP_

#include <array>
#include <cstdint>
#include <functional>

#include "hoadoa/rng.hpp"
#include "hoadoa/sh.hpp"

namespace hoadoa {

struct RoomSpec {
  Vec3 dims;  // Lx, Ly, Lz in meters
  // Per-wall absorption in [0, 1], ordered x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
  std::array<double, 6> absorption{};
  double speed_of_sound = 343.0;
};

// Sabine estimate 0.161 V / sum(alpha_i S_i). Walls fully absorbent
// everywhere still give a positive (tiny) value.
double sabine_t60(const RoomSpec& room);

struct SrirRequest {
  RoomSpec room;
  Vec3 source;
  Vec3 receiver;
  int ambisonics_order = 4;
  double sample_rate = 48000.0;
  // Images stop at this many wall hits, or earlier once the amplitude
  // drops below 1e-6 of the direct path.
  int max_reflection_order = 20;
  size_t length = 0;  // samples
};

struct HoaSrir {
  HoaSignal hoa;
  Direction doa_label;  // receiver-frame direction toward the source
  double distance = 0.0;
};

// Enumerates image sources by coordinate reflection, one windowed-sinc
// arrival per image at delay distance/c*fs with amplitude
// (1/distance) * prod sqrt(1 - alpha) over encountered walls, encoded at
// the image's receiver-frame direction. Throws std::invalid_argument when
// source/receiver are not strictly inside the room or length is zero.
HoaSrir image_source_srir(const SrirRequest& req);

using RoomSampler = std::function<RoomSpec(Rng&)>;

// Average of three synthetic diffuse tails. Each tail draws a room from
// the sampler and sums >= 256 random-direction arrivals whose amplitudes
// decay with the room's Sabine time; the first 10 ms are zeroed.
// Deterministic per seed.
HoaSignal diffuse_srir(uint64_t rng_seed, const RoomSampler& room_sampler,
                       int order, size_t length, double sample_rate);

}  // namespace hoadoa

#endif  // HOADOA_ROOM_HPP_
