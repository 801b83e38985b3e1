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
// Network input features: magnitude/phase spectrograms of all Ambisonics
// channels, and first-order sound-intensity features.

#ifndef HOADOA_FEATURES_HPP_
#define HOADOA_FEATURES_HPP_

#include <cstddef>
#include <vector>

#include "hoadoa/dsp.hpp"

namespace hoadoa {

enum class FeatureKind { kMagphase, kIntensity };

// Real-valued feature stack, frame-major with channels last:
// data[(t * bins + f) * channels + c]. For magphase the channel count is
// 2 (order+1)^2; for intensity it is 6.
struct FeatureTensor {
  size_t frames = 0;
  size_t bins = 0;
  size_t channels = 0;
  FeatureKind kind = FeatureKind::kIntensity;
  int order = 0;  // meaningful for magphase
  std::vector<double> data;

  double& at(size_t t, size_t f, size_t c) {
    return data[(t * bins + f) * channels + c];
  }
  double at(size_t t, size_t f, size_t c) const {
    return data[(t * bins + f) * channels + c];
  }
};

// One time-frequency bin of the intensity decomposition.
struct IntensityFrameBin {
  double active[3];    // -[Re(WX*), Re(WY*), Re(WZ*)]
  double reactive[3];  // -[Im(WX*), Im(WY*), Im(WZ*)]
  double normalizer;   // |W|^2 + (|X|^2 + |Y|^2 + |Z|^2) / 3
};

// FOA channels in ACN order: W, Y, Z, X.
IntensityFrameBin intensity_bin(const std::complex<double>& w,
                                const std::complex<double>& y,
                                const std::complex<double>& z,
                                const std::complex<double>& x);

// Magnitudes of all ACN channels followed by phases of all ACN channels,
// phases in (-pi, pi] with the phase of zero defined as 0. Throws if the
// spectrogram does not carry exactly (order+1)^2 channels.
FeatureTensor magphase_features(const ComplexSpectrogram& spec, int order);

// Per-bin (-1/C) [I_a; I_r] stacked as [active x,y,z, reactive x,y,z].
// Bins with C = 0 yield zeros. Each component lies in
// [-sqrt(3)/2, sqrt(3)/2]. Throws if fewer than 4 channels.
FeatureTensor intensity_features(const ComplexSpectrogram& spec);

}  // namespace hoadoa

#endif  // HOADOA_FEATURES_HPP_
