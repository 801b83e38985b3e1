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

#include "hoadoa/room.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hoadoa {

namespace {

constexpr int kTaps = 32;
constexpr double kHalfWidth = kTaps / 2.0;

// Adds amp * enc[ch] at fractional sample position `delay` using a
// Hann-windowed sinc spanning kTaps samples.
void deposit(std::vector<std::vector<double>>& channels,
             const std::vector<double>& enc, double amp, double delay) {
  const auto len = static_cast<long>(channels[0].size());
  const long first = static_cast<long>(std::floor(delay)) - kTaps / 2 + 1;
  double kernel[kTaps];
  for (int k = 0; k < kTaps; ++k) {
    const double t = static_cast<double>(first + k) - delay;
    const double sinc =
        (t == 0.0) ? 1.0 : std::sin(kPi * t) / (kPi * t);
    const double win = 0.5 * (1.0 + std::cos(kPi * t / kHalfWidth));
    kernel[k] = amp * sinc * win;
  }
  for (size_t c = 0; c < channels.size(); ++c) {
    const double g = enc[c];
    if (g == 0.0) continue;
    double* out = channels[c].data();
    for (int k = 0; k < kTaps; ++k) {
      const long n = first + k;
      if (n < 0 || n >= len) continue;
      out[n] += g * kernel[k];
    }
  }
}

void check_inside(const Vec3& p, const Vec3& dims, const char* who) {
  if (p.x <= 0.0 || p.x >= dims.x || p.y <= 0.0 || p.y >= dims.y ||
      p.z <= 0.0 || p.z >= dims.z)
    throw std::invalid_argument(std::string("image_source_srir: ") + who +
                                " not strictly inside the room");
}

}  // namespace

double sabine_t60(const RoomSpec& room) {
  const double lx = room.dims.x, ly = room.dims.y, lz = room.dims.z;
  const double area =
      (room.absorption[0] + room.absorption[1]) * ly * lz +
      (room.absorption[2] + room.absorption[3]) * lx * lz +
      (room.absorption[4] + room.absorption[5]) * lx * ly;
  return 0.161 * lx * ly * lz / area;
}

HoaSrir image_source_srir(const SrirRequest& req) {
  check_inside(req.source, req.room.dims, "source");
  check_inside(req.receiver, req.room.dims, "receiver");
  if (req.length == 0)
    throw std::invalid_argument("image_source_srir: non-positive length");
  if (req.ambisonics_order < 1 || req.ambisonics_order > 4)
    throw std::invalid_argument("image_source_srir: order must be in [1,4]");

  const RoomSpec& room = req.room;
  const double fs = req.sample_rate;
  const double c = room.speed_of_sound;
  double beta[6];
  for (int w = 0; w < 6; ++w)
    beta[w] = std::sqrt(std::fmax(0.0, 1.0 - room.absorption[w]));

  HoaSrir out;
  out.hoa = HoaSignal::zeros(req.ambisonics_order, fs, req.length);
  const Vec3 rel = req.source - req.receiver;
  out.distance = norm(rel);
  out.doa_label = Direction::from_unit_vector(rel);

  const double direct_amp = 1.0 / out.distance;
  const double amp_floor = 1e-6 * direct_amp;
  // No image beyond the IR tail (kernel margin included) can contribute.
  const double max_dist = (static_cast<double>(req.length) + kHalfWidth) / fs * c;
  // hits along one axis = |m - q| + |m| >= 2|m| - 1, so the reflection
  // order bounds |m|; the IR length bounds it independently.
  const int m_cap = (req.max_reflection_order + 1) / 2 + 1;
  auto axis_range = [&](double dim) {
    const int by_len = static_cast<int>(max_dist / (2.0 * dim)) + 1;
    return std::min(m_cap, by_len);
  };
  const int mx_max = axis_range(room.dims.x);
  const int my_max = axis_range(room.dims.y);
  const int mz_max = axis_range(room.dims.z);

  const int nc = (req.ambisonics_order + 1) * (req.ambisonics_order + 1);
  std::vector<double> enc(static_cast<size_t>(nc));
  const double dims[3] = {room.dims.x, room.dims.y, room.dims.z};
  const double src[3] = {req.source.x, req.source.y, req.source.z};
  const double rcv[3] = {req.receiver.x, req.receiver.y, req.receiver.z};

  for (int mx = -mx_max; mx <= mx_max; ++mx)
    for (int qx = 0; qx <= 1; ++qx) {
      const int hx = std::abs(mx - qx) + std::abs(mx);
      if (hx > req.max_reflection_order) continue;
      const double px = (1 - 2 * qx) * src[0] + 2.0 * mx * dims[0] - rcv[0];
      const double bx = std::pow(beta[0], std::abs(mx - qx)) *
                        std::pow(beta[1], std::abs(mx));
      for (int my = -my_max; my <= my_max; ++my)
        for (int qy = 0; qy <= 1; ++qy) {
          const int hy = std::abs(my - qy) + std::abs(my);
          if (hx + hy > req.max_reflection_order) continue;
          const double py =
              (1 - 2 * qy) * src[1] + 2.0 * my * dims[1] - rcv[1];
          const double by = bx * std::pow(beta[2], std::abs(my - qy)) *
                            std::pow(beta[3], std::abs(my));
          for (int mz = -mz_max; mz <= mz_max; ++mz)
            for (int qz = 0; qz <= 1; ++qz) {
              const int hz = std::abs(mz - qz) + std::abs(mz);
              if (hx + hy + hz > req.max_reflection_order) continue;
              const double pz =
                  (1 - 2 * qz) * src[2] + 2.0 * mz * dims[2] - rcv[2];
              const double dist =
                  std::sqrt(px * px + py * py + pz * pz);
              if (dist * fs / c >
                  static_cast<double>(req.length) + kHalfWidth)
                continue;
              const double amp = by *
                                 std::pow(beta[4], std::abs(mz - qz)) *
                                 std::pow(beta[5], std::abs(mz)) / dist;
              if (amp < amp_floor) continue;
              encode_direction(req.ambisonics_order,
                               Direction::from_unit_vector({px, py, pz}),
                               enc.data());
              deposit(out.hoa.channels, enc, amp, dist * fs / c);
            }
        }
    }
  return out;
}

HoaSignal diffuse_srir(uint64_t rng_seed, const RoomSampler& room_sampler,
                       int order, size_t length, double sample_rate) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("diffuse_srir: order must be in [1,4]");
  constexpr int kTails = 3;
  constexpr int kArrivals = 2048;  // >= 256 required for a dense tail

  HoaSignal out = HoaSignal::zeros(order, sample_rate, length);
  Rng rng(rng_seed);
  std::vector<double> enc(static_cast<size_t>((order + 1) * (order + 1)));
  const double duration = static_cast<double>(length) / sample_rate;

  for (int tail = 0; tail < kTails; ++tail) {
    const RoomSpec room = room_sampler(rng);
    const double t60 = sabine_t60(room);
    // Amplitude decays at half the energy rate: 60 dB over t60.
    const double rate = 6.907755278982137 / t60;  // ln(1e3)
    for (int a = 0; a < kArrivals; ++a) {
      const double t = rng.uniform(0.0, duration);
      double ux, uy, uz;
      rng.unit_vector(&ux, &uy, &uz);
      const double amp = rng.normal() * std::exp(-rate * t);
      encode_direction(order, Direction::from_unit_vector({ux, uy, uz}),
                       enc.data());
      deposit(out.channels, enc, amp / kTails, t * sample_rate);
    }
  }

  const auto early = static_cast<size_t>(0.010 * sample_rate);
  for (auto& ch : out.channels)
    for (size_t i = 0; i < std::min(early, ch.size()); ++i) ch[i] = 0.0;
  return out;
}

}  // namespace hoadoa
