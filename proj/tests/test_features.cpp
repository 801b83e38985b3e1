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

#include "hoadoa/features.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "doctest.h"
#include "hoadoa/rng.hpp"
#include "hoadoa/sh.hpp"

using namespace hoadoa;

namespace {

ComplexSpectrogram random_spec(Rng& rng, size_t frames, size_t bins,
                               size_t channels) {
  ComplexSpectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.channels = channels;
  s.data.resize(frames * bins * channels);
  for (auto& v : s.data) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return s;
}

// Ideal anechoic plane wave: every FOA channel is the encoding coefficient
// times a common complex source bin.
ComplexSpectrogram plane_wave_spec(Rng& rng, const Direction& dir,
                                   size_t frames, size_t bins) {
  auto enc = encode_direction(1, dir);
  ComplexSpectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.channels = 4;
  s.data.resize(frames * bins * 4);
  for (size_t t = 0; t < frames; ++t)
    for (size_t f = 0; f < bins; ++f) {
      std::complex<double> src(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      for (size_t c = 0; c < 4; ++c) s.at(t, f, c) = enc[c] * src;
    }
  return s;
}

}  // namespace

TEST_CASE("magphase channel count and ordering") {
  Rng rng(1);
  auto spec = random_spec(rng, 3, 8, 25);
  auto feat = magphase_features(spec, 4);
  CHECK(feat.channels == 50);
  CHECK(feat.frames == 3);
  CHECK(feat.bins == 8);

  // Round trip: magnitude * e^{i phase} reconstructs the bin.
  for (size_t t = 0; t < 3; ++t)
    for (size_t f = 0; f < 8; ++f)
      for (size_t c = 0; c < 25; ++c) {
        std::complex<double> back =
            feat.at(t, f, c) * std::exp(std::complex<double>(
                                   0.0, feat.at(t, f, 25 + c)));
        CHECK(std::abs(back - spec.at(t, f, c)) < 1e-9);
      }

  CHECK_THROWS_AS(magphase_features(spec, 3), std::invalid_argument);
}

TEST_CASE("magphase of zero and of a pure imaginary bin") {
  ComplexSpectrogram spec;
  spec.frames = 1;
  spec.bins = 2;
  spec.channels = 1;
  spec.data = {{0.0, 0.0}, {0.0, 1.0}};
  auto feat = magphase_features(spec, 0);
  CHECK(feat.at(0, 0, 0) == 0.0);
  CHECK(feat.at(0, 0, 1) == 0.0);  // phase of zero is zero
  CHECK(std::abs(feat.at(0, 1, 0) - 1.0) < 1e-15);
  CHECK(std::abs(feat.at(0, 1, 1) - kPi / 2) < 1e-15);
}

TEST_CASE("magphase phases stay in (-pi, pi]") {
  Rng rng(2);
  auto spec = random_spec(rng, 4, 16, 4);
  spec.at(0, 0, 0) = {-1.0, -0.0};  // arg would give -pi
  auto feat = magphase_features(spec, 1);
  for (size_t t = 0; t < 4; ++t)
    for (size_t f = 0; f < 16; ++f)
      for (size_t c = 4; c < 8; ++c) {
        CHECK(feat.at(t, f, c) > -kPi);
        CHECK(feat.at(t, f, c) <= kPi);
      }
}

TEST_CASE("intensity of silence is zero") {
  ComplexSpectrogram spec;
  spec.frames = 2;
  spec.bins = 5;
  spec.channels = 4;
  spec.data.assign(2 * 5 * 4, {0.0, 0.0});
  auto feat = intensity_features(spec);
  CHECK(feat.channels == 6);
  for (double v : feat.data) CHECK(v == 0.0);
}

TEST_CASE("plane wave gives active 0.75 u and zero reactive part") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    double ux, uy, uz;
    rng.unit_vector(&ux, &uy, &uz);
    Direction dir = Direction::from_unit_vector({ux, uy, uz});
    Vec3 u = dir.unit_vector();
    auto spec = plane_wave_spec(rng, dir, 5, 32);
    auto feat = intensity_features(spec);
    for (size_t t = 0; t < 5; ++t)
      for (size_t f = 0; f < 32; ++f) {
        // Brute-force per-bin evaluation of the defining equations.
        auto w = spec.at(t, f, 0);
        if (std::abs(w) == 0.0) continue;
        auto b = intensity_bin(w, spec.at(t, f, 1), spec.at(t, f, 2),
                               spec.at(t, f, 3));
        CHECK(std::abs(-b.active[0] / b.normalizer - 0.75 * u.x) < 1e-12);
        CHECK(std::abs(-b.active[1] / b.normalizer - 0.75 * u.y) < 1e-12);
        CHECK(std::abs(-b.active[2] / b.normalizer - 0.75 * u.z) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 0) - 0.75 * u.x) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 1) - 0.75 * u.y) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 2) - 0.75 * u.z) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 3)) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 4)) < 1e-12);
        CHECK(std::abs(feat.at(t, f, 5)) < 1e-12);
      }
  }
}

TEST_CASE("averaged active part recovers the plane-wave direction") {
  Rng rng(4);
  Direction dir(0.35, -2.0);
  auto spec = plane_wave_spec(rng, dir, 10, 64);
  auto feat = intensity_features(spec);
  double ax = 0.0, ay = 0.0, az = 0.0;
  size_t count = 0;
  for (size_t t = 0; t < feat.frames; ++t)
    for (size_t f = 0; f < feat.bins; ++f) {
      double x = feat.at(t, f, 0), y = feat.at(t, f, 1), z = feat.at(t, f, 2);
      if (x == 0.0 && y == 0.0 && z == 0.0) continue;
      ax += x;
      ay += y;
      az += z;
      ++count;
    }
  REQUIRE(count > 0);
  Direction est = Direction::from_unit_vector({ax, ay, az});
  CHECK(angular_distance(est, dir) < 0.1 * kPi / 180.0);
}

TEST_CASE("intensity components are bounded by sqrt(3)/2") {
  Rng rng(5);
  const double bound = std::sqrt(3.0) / 2.0 + 1e-12;
  auto spec = random_spec(rng, 20, 64, 4);
  auto feat = intensity_features(spec);
  for (double v : feat.data) CHECK(std::abs(v) <= bound);

  // Adversarial search near the maximizer |X| = sqrt(3) |W|.
  for (int trial = 0; trial < 1000; ++trial) {
    std::complex<double> w(rng.normal(), rng.normal());
    std::complex<double> x = std::sqrt(3.0) * w *
                             std::exp(std::complex<double>(0, rng.uniform(0.0, kPi)));
    auto b = intensity_bin(w, {0, 0}, {0, 0}, x);
    if (b.normalizer == 0.0) continue;
    CHECK(std::abs(b.active[0] / b.normalizer) <= bound);
    CHECK(std::abs(b.reactive[0] / b.normalizer) <= bound);
  }
}

TEST_CASE("intensity features are scale invariant") {
  Rng rng(6);
  auto spec = random_spec(rng, 4, 32, 4);
  auto base = intensity_features(spec);
  for (double alpha : {2.0, -0.5, 1e-4, 300.0}) {
    auto scaled = spec;
    for (auto& v : scaled.data) v *= alpha;
    auto feat = intensity_features(scaled);
    for (size_t i = 0; i < feat.data.size(); ++i)
      CHECK(std::abs(feat.data[i] - base.data[i]) < 1e-12);
  }
}

TEST_CASE("normalizer is positive whenever any channel is nonzero") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::complex<double> v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    std::complex<double> zero(0.0, 0.0);
    int slot = static_cast<int>(rng.uniform_int(4));
    auto b = intensity_bin(slot == 0 ? v : zero, slot == 1 ? v : zero,
                           slot == 2 ? v : zero, slot == 3 ? v : zero);
    if (std::abs(v) > 0.0) CHECK(b.normalizer > 0.0);
  }
}

TEST_CASE("intensity rejects sub-FOA input") {
  ComplexSpectrogram spec;
  spec.frames = 1;
  spec.bins = 1;
  spec.channels = 3;
  spec.data.assign(3, {1.0, 0.0});
  CHECK_THROWS_AS(intensity_features(spec), std::invalid_argument);
}
