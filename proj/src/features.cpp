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
#include <stdexcept>

namespace hoadoa {

IntensityFrameBin intensity_bin(const std::complex<double>& w,
                                const std::complex<double>& y,
                                const std::complex<double>& z,
                                const std::complex<double>& x) {
  IntensityFrameBin out;
  const std::complex<double> wx = w * std::conj(x);
  const std::complex<double> wy = w * std::conj(y);
  const std::complex<double> wz = w * std::conj(z);
  out.active[0] = -wx.real();
  out.active[1] = -wy.real();
  out.active[2] = -wz.real();
  out.reactive[0] = -wx.imag();
  out.reactive[1] = -wy.imag();
  out.reactive[2] = -wz.imag();
  out.normalizer = std::norm(w) + (std::norm(x) + std::norm(y) + std::norm(z)) / 3.0;
  return out;
}

FeatureTensor magphase_features(const ComplexSpectrogram& spec, int order) {
  const size_t want = static_cast<size_t>((order + 1) * (order + 1));
  if (order < 0 || spec.channels != want)
    throw std::invalid_argument("magphase_features: channel-count mismatch");

  FeatureTensor out;
  out.frames = spec.frames;
  out.bins = spec.bins;
  out.channels = 2 * want;
  out.kind = FeatureKind::kMagphase;
  out.order = order;
  out.data.resize(out.frames * out.bins * out.channels);
  for (size_t t = 0; t < spec.frames; ++t)
    for (size_t f = 0; f < spec.bins; ++f)
      for (size_t c = 0; c < want; ++c) {
        const std::complex<double> v = spec.at(t, f, c);
        double phase = (v == std::complex<double>(0.0, 0.0)) ? 0.0 : std::arg(v);
        if (phase <= -kPi) phase = kPi;
        out.at(t, f, c) = std::abs(v);
        out.at(t, f, want + c) = phase;
      }
  return out;
}

FeatureTensor intensity_features(const ComplexSpectrogram& spec) {
  if (spec.channels < 4)
    throw std::invalid_argument("intensity_features: needs FOA channels");

  FeatureTensor out;
  out.frames = spec.frames;
  out.bins = spec.bins;
  out.channels = 6;
  out.kind = FeatureKind::kIntensity;
  out.order = 1;
  out.data.assign(out.frames * out.bins * 6, 0.0);
  for (size_t t = 0; t < spec.frames; ++t)
    for (size_t f = 0; f < spec.bins; ++f) {
      const IntensityFrameBin b =
          intensity_bin(spec.at(t, f, 0), spec.at(t, f, 1), spec.at(t, f, 2),
                        spec.at(t, f, 3));
      if (b.normalizer == 0.0) continue;  // silent bin, features stay 0
      const double s = -1.0 / b.normalizer;
      for (int k = 0; k < 3; ++k) {
        out.at(t, f, static_cast<size_t>(k)) = s * b.active[k];
        out.at(t, f, static_cast<size_t>(k + 3)) = s * b.reactive[k];
      }
    }
  return out;
}

}  // namespace hoadoa
