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

#include "hoadoa/baseline.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "hoadoa/dsp.hpp"
#include "hoadoa/rng.hpp"

using namespace hoadoa;

namespace {

constexpr double kDeg = 180.0 / kPi;

// Anechoic plane wave: a white-noise carrier encoded at dir.
ComplexSpectrogram plane_wave_spec(int order, const Direction& dir,
                                   uint64_t seed, size_t samples = 16000) {
  Rng rng(seed);
  std::vector<double> carrier(samples);
  for (double& v : carrier) v = rng.normal();
  const std::vector<double> enc = encode_direction(order, dir);
  HoaSignal sig = HoaSignal::zeros(order, 16000.0, samples);
  for (size_t c = 0; c < enc.size(); ++c)
    for (size_t i = 0; i < samples; ++i)
      sig.channels[c][i] = enc[c] * carrier[i];
  return stft(sig, StftConfig{});
}

// Reference pattern g(gamma) via the standard-library Legendre oracle.
double pattern_oracle(int order, double gamma) {
  double num = 0.0, den = 0.0;
  for (int n = 0; n <= order; ++n) {
    num += (2.0 * n + 1.0) * std::legendre(n, std::cos(gamma));
    den += 2.0 * n + 1.0;
  }
  return num / den;
}

}  // namespace

TEST_CASE("pseudo-intensity recovers an anechoic plane wave") {
  const Direction truth(0.4, -1.3);
  const ComplexSpectrogram spec = plane_wave_spec(1, truth, 21);
  CHECK(angular_distance(pseudo_intensity_doa(spec), truth) * kDeg < 0.1);

  // Higher-order input: only the FOA channels participate.
  const ComplexSpectrogram spec4 = plane_wave_spec(4, truth, 22);
  CHECK(angular_distance(pseudo_intensity_doa(spec4), truth) * kDeg < 0.1);
}

TEST_CASE("opposing sources cancel in the accumulated intensity") {
  const Direction left(0.0, kPi / 2.0), right(0.0, -kPi / 2.0);
  const ComplexSpectrogram only_left = plane_wave_spec(1, left, 31);

  Rng rng_a(31), rng_b(77);
  const size_t samples = 16000;
  std::vector<double> ca(samples), cb(samples);
  for (size_t i = 0; i < samples; ++i) {
    ca[i] = rng_a.normal();
    cb[i] = rng_b.normal();
  }
  const std::vector<double> ea = encode_direction(1, left);
  const std::vector<double> eb = encode_direction(1, right);
  HoaSignal sig = HoaSignal::zeros(1, 16000.0, samples);
  for (size_t c = 0; c < 4; ++c)
    for (size_t i = 0; i < samples; ++i)
      sig.channels[c][i] = ea[c] * ca[i] + eb[c] * cb[i];

  const Vec3 acc = pseudo_intensity_vector(stft(sig, StftConfig{}));
  const Vec3 single = pseudo_intensity_vector(only_left);
  CHECK(std::abs(acc.y) < 0.05 * norm(single));
}

TEST_CASE("pseudo-intensity rejects silence and sub-FOA input") {
  const HoaSignal silent = HoaSignal::zeros(1, 16000.0, 16000);
  CHECK_THROWS_AS(pseudo_intensity_doa(stft(silent, StftConfig{})),
                  std::invalid_argument);
  ComplexSpectrogram mono;
  mono.frames = 1;
  mono.bins = 4;
  mono.channels = 1;
  mono.data.assign(4, {1.0, 0.0});
  CHECK_THROWS_AS(pseudo_intensity_doa(mono), std::invalid_argument);
}

TEST_CASE("steered power matches the per-bin beamforming oracle") {
  Rng rng(5);
  ComplexSpectrogram spec;
  spec.frames = 3;
  spec.bins = 8;
  spec.channels = 9;
  spec.data.resize(spec.frames * spec.bins * spec.channels);
  for (auto& v : spec.data) v = {rng.normal(), rng.normal()};

  const std::vector<Direction> grid = fibonacci_grid(20);
  const PowerMap map = steered_power_map(spec, 2, grid);
  REQUIRE(map.power.size() == grid.size());

  for (size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> w = encode_direction(2, grid[g]);
    for (size_t k = 0; k < w.size(); ++k)
      w[k] *= 2.0 * acn_to_index(static_cast<int>(k)).order + 1.0;
    double expect = 0.0;
    for (size_t t = 0; t < spec.frames; ++t) {
      for (size_t f = 0; f < spec.bins; ++f) {
        std::complex<double> b = 0.0;
        for (size_t k = 0; k < spec.channels; ++k)
          b += w[k] * spec.at(t, f, k);
        expect += std::norm(b);
      }
    }
    CHECK(map.power[g] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("steered power map peaks at the source and scales quadratically") {
  const Direction truth(0.25, 2.1);
  const ComplexSpectrogram spec = plane_wave_spec(4, truth, 9, 8000);
  const std::vector<Direction> grid = fibonacci_grid(2562);
  const PowerMap map = steered_power_map(spec, 4, grid);

  size_t peak = 0;
  for (size_t g = 1; g < grid.size(); ++g)
    if (map.power[g] > map.power[peak]) peak = g;
  CHECK(angular_distance(grid[peak], truth) * kDeg < 5.0);
  for (double p : map.power) CHECK(p >= 0.0);

  // alpha-scaled input scales the quadratic form by alpha^2; a power of
  // two keeps every intermediate bit-exact, so equality is strict.
  ComplexSpectrogram scaled = spec;
  for (auto& v : scaled.data) v *= 2.0;
  const PowerMap map4 = steered_power_map(scaled, 4, grid);
  for (size_t g = 0; g < grid.size(); ++g)
    CHECK(map4.power[g] == 4.0 * map.power[g]);

  // Zero input: all-zero map.
  ComplexSpectrogram zero = spec;
  for (auto& v : zero.data) v = 0.0;
  const PowerMap zmap = steered_power_map(zero, 4, grid);
  for (double p : zmap.power) CHECK(p == 0.0);

  CHECK_THROWS_AS(steered_power_map(spec, 2, grid), std::invalid_argument);
  CHECK_THROWS_AS(steered_power_map(spec, 4, {}), std::invalid_argument);
}

TEST_CASE("a truncated plane wave peaks exactly at the source direction") {
  for (int order = 1; order <= 4; ++order) {
    const Direction truth(-0.15, 0.9);
    const ComplexSpectrogram spec = plane_wave_spec(order, truth, 40 + order,
                                                    4000);
    std::vector<Direction> grid = fibonacci_grid(500);
    grid.push_back(truth);
    const PowerMap map = steered_power_map(spec, order, grid);
    size_t peak = 0;
    for (size_t g = 1; g < grid.size(); ++g)
      if (map.power[g] > map.power[peak]) peak = g;
    CHECK(peak == grid.size() - 1);
  }
}

TEST_CASE("the normalized map traces the Legendre beampattern") {
  // Steering away from a plane wave at +x by a known angle gives power
  // proportional to g(gamma)^2.
  const Direction truth(0.0, 0.0);
  const ComplexSpectrogram spec = plane_wave_spec(4, truth, 55, 4000);
  std::vector<Direction> grid{truth};
  const std::vector<double> gammas = {0.05, 0.2, 0.5, 0.9, 1.4};
  for (double gamma : gammas) grid.emplace_back(0.0, gamma);
  const PowerMap map = steered_power_map(spec, 4, grid);
  for (size_t i = 0; i < gammas.size(); ++i) {
    const double expect = pattern_oracle(4, gammas[i]);
    CHECK(map.power[i + 1] / map.power[0] ==
          doctest::Approx(expect * expect).epsilon(1e-9));
  }
}

TEST_CASE("srp refinement stays on a symmetric peak and breaks ties low") {
  // Symmetric ring: peak at +z, eight equal neighbors, distant filler.
  PowerMap map;
  map.order = 4;
  map.grid.emplace_back(kPi / 2.0, 0.0);
  const double ring = 4.0 / kDeg;
  for (int k = 0; k < 8; ++k)
    map.grid.emplace_back(kPi / 2.0 - ring, k * kPi / 4.0);
  for (int k = 0; k < 24; ++k)
    map.grid.emplace_back(-kPi / 3.0, k * kPi / 12.0);
  map.power.assign(map.grid.size(), 0.0);
  map.power[0] = 1.0;
  for (int k = 1; k <= 8; ++k) map.power[k] = 0.9;
  const Direction refined = srp_doa(map);
  CHECK(angular_distance(refined, map.grid[0]) * kDeg < 1e-6);

  // Uniform map: documented lowest-index tie-break.
  PowerMap flat;
  flat.order = 1;
  flat.grid = fibonacci_grid(64);
  flat.power.assign(64, 2.5);
  CHECK(angular_distance(srp_doa(flat), flat.grid[0]) == 0.0);

  PowerMap empty;
  CHECK_THROWS_AS(srp_doa(empty), std::invalid_argument);
}

TEST_CASE("srp refines an anechoic plane wave within half a degree") {
  const std::vector<Direction> grid = fibonacci_grid(2562);
  Rng rng(4711);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    double x, y, z;
    rng.unit_vector(&x, &y, &z);
    const Direction truth = Direction::from_unit_vector({x, y, z});
    const ComplexSpectrogram spec =
        plane_wave_spec(4, truth, 600 + trial, 4000);
    const Direction est = srp_doa(steered_power_map(spec, 4, grid));
    worst = std::max(worst, angular_distance(est, truth) * kDeg);
  }
  CHECK(worst < 0.5);
}

TEST_CASE("estimates rotate with the source about the z axis") {
  const double dphi = 0.7;
  const Direction d1(0.3, 0.4), d2(0.3, 0.4 + dphi);
  const std::vector<Direction> grid = fibonacci_grid(2562);

  const ComplexSpectrogram s1 = plane_wave_spec(2, d1, 81, 8000);
  const ComplexSpectrogram s2 = plane_wave_spec(2, d2, 81, 8000);

  const Direction pi1 = pseudo_intensity_doa(s1);
  const Direction pi2 = pseudo_intensity_doa(s2);
  const Direction rotated_pi(pi1.elevation(), pi1.azimuth() + dphi);
  CHECK(angular_distance(rotated_pi, pi2) * kDeg < 0.2);

  const Direction sr1 = srp_doa(steered_power_map(s1, 2, grid));
  const Direction sr2 = srp_doa(steered_power_map(s2, 2, grid));
  const Direction rotated_sr(sr1.elevation(), sr1.azimuth() + dphi);
  CHECK(angular_distance(rotated_sr, sr2) * kDeg < 0.2);
}

TEST_CASE("beamwidth narrows with order and matches the dense oracle") {
  double widths[5];
  for (int order = 1; order <= 4; ++order) {
    widths[order] = beamwidth(order);

    // Dense scan at one millidegree steps brackets the 0.5 crossing.
    double crossing = 0.0;
    for (double gamma_deg = 0.0; gamma_deg <= 180.0; gamma_deg += 1e-3) {
      if (pattern_oracle(order, gamma_deg / kDeg) <= 0.5) {
        crossing = gamma_deg;
        break;
      }
    }
    CHECK(std::abs(widths[order] - 2.0 * crossing) < 0.1);
  }
  CHECK(widths[1] > widths[2]);
  CHECK(widths[2] > widths[3]);
  CHECK(widths[3] > widths[4]);

  // Pinned reference values for the four patterns.
  CHECK(widths[1] == doctest::Approx(141.0577).epsilon(1e-4));
  CHECK(widths[2] == doctest::Approx(88.4651).epsilon(1e-4));
  CHECK(widths[3] == doctest::Approx(65.0394).epsilon(1e-4));
  CHECK(widths[4] == doctest::Approx(51.5659).epsilon(1e-4));

  CHECK_THROWS_AS(beamwidth(0), std::invalid_argument);
  CHECK_THROWS_AS(beamwidth(5), std::invalid_argument);
}
