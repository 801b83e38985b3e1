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
// Classical DOA estimators: the pseudo-intensity vector and steered
// response power over a spherical grid. Deterministic, so they double as
// oracles for the learned estimators.

#ifndef HOADOA_BASELINE_HPP_
#define HOADOA_BASELINE_HPP_

#include <vector>

#include "hoadoa/dsp.hpp"
#include "hoadoa/sh.hpp"

namespace hoadoa {

// Steered response power per grid direction.
struct PowerMap {
  std::vector<Direction> grid;
  std::vector<double> power;  // >= 0, same length as grid
  int order = 0;
};

// Active intensity summed over all time-frequency bins with positive
// energy (the energy-weighted mean of the per-bin normalized feature).
// Throws std::invalid_argument on fewer than 4 channels or all-silent
// input.
Vec3 pseudo_intensity_vector(const ComplexSpectrogram& spec);
// Direction of the accumulated vector.
Direction pseudo_intensity_doa(const ComplexSpectrogram& spec);

// Plane-wave-decomposition beam per direction: b(t,f) =
// sum_nm (2n+1) Y_nm(dir) spec_nm(t,f), power = sum |b|^2. The (2n+1)
// factor rescales the SN3D channels so the beam reduces to the Legendre
// pattern sum (2n+1) P_n(cos gamma). Evaluated through the accumulated
// channel covariance, which is algebraically identical and turns the
// per-bin scan into one pass. Throws on channel/order mismatch or an
// empty grid.
PowerMap steered_power_map(const ComplexSpectrogram& spec, int order,
                           const std::vector<Direction>& grid);

// Argmax over the grid (ties break to the lowest index) followed by a
// local quadratic fit in the tangent plane over neighbors within 1.5x the
// mean grid spacing. When the fit is degenerate or its vertex escapes the
// window, falls back to the floor-subtracted power-weighted centroid of
// the window, and to the peak grid point itself when even those weights
// vanish. Throws std::invalid_argument on an empty or malformed map.
Direction srp_doa(const PowerMap& map);

// Half-power width: the full angle 2 gamma* at which the normalized
// pattern g(gamma) = sum_{n<=order} (2n+1) P_n(cos gamma) / sum (2n+1)
// first drops to 0.5, found by bisection. Degrees. Order in [1, 4].
double beamwidth(int order);

}  // namespace hoadoa

#endif  // HOADOA_BASELINE_HPP_
