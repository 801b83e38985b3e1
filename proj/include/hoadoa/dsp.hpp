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
// Raw signal plumbing: STFT, convolution, 3:1 resampling, SNR-controlled
// mixing, and segmentation. All functions are pure; the FFT is hand-rolled
// so results are bit-identical across platforms and worker counts.

#ifndef HOADOA_DSP_HPP_
#define HOADOA_DSP_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "hoadoa/sh.hpp"

namespace hoadoa {

// In-place radix-2 FFT. Size must be a power of two (throws otherwise).
// The inverse applies the 1/n scale.
void fft_pow2(std::vector<std::complex<double>>& data, bool inverse);

enum class Window { kHannPeriodic, kRect };

// Tapering coefficients; periodic Hann is 0.5 (1 - cos(2 pi n / N)).
std::vector<double> make_window(Window window, size_t length);

struct StftConfig {
  size_t window_length = 640;
  size_t fft_length = 1024;  // power of two
  size_t hop = 320;
  Window window = Window::kHannPeriodic;
};

// Complex STFT frames, frame-major with channels last:
// data[(t * bins + f) * channels + c].
struct ComplexSpectrogram {
  size_t frames = 0;
  size_t bins = 0;
  size_t channels = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(size_t t, size_t f, size_t c) {
    return data[(t * bins + f) * channels + c];
  }
  const std::complex<double>& at(size_t t, size_t f, size_t c) const {
    return data[(t * bins + f) * channels + c];
  }
};

// Frame count is ceil(length / hop); the tail is zero-padded so every hop
// position yields a frame. Each frame is windowed, zero-padded to
// fft_length, transformed, and bins 0..fft_length/2 - 1 kept (the Nyquist
// bin is dropped; DC stays). Throws std::invalid_argument on an empty
// signal or an invalid config.
ComplexSpectrogram stft(const std::vector<std::vector<double>>& channels,
                        const StftConfig& cfg);
ComplexSpectrogram stft(const HoaSignal& signal, const StftConfig& cfg);

// Full linear convolution, length a + b - 1. Small inputs run the direct
// sum; larger ones go through a single zero-padded FFT. Throws on empty
// input.
std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& impulse_response);
// Mono signal against a multichannel impulse response, channel-wise.
HoaSignal convolve(const std::vector<double>& signal,
                   const HoaSignal& impulse_response);

// Anti-alias lowpass (121-tap Kaiser-windowed sinc, beta = 8, cutoff at
// the new Nyquist) followed by decimation by 3. Output length ceil(n/3).
// The filter delay is compensated, so y[k] aligns with x[3k].
std::vector<double> resample_3to1(const std::vector<double>& signal);
HoaSignal resample_3to1(const HoaSignal& signal);

// Scales the noise by a single gain g, identical on every channel, so the
// channel-0 power ratio satisfies 10 log10(P_primary / P_noise) = snr_db,
// then returns primary + g * noise. The noise track is read circularly
// starting at noise_offset, so shorter noise loops and longer noise is
// cropped. Throws if the noise is empty or silent on channel 0.
std::vector<std::vector<double>> mix_at_snr(
    const std::vector<std::vector<double>>& primary,
    const std::vector<std::vector<double>>& noise, double snr_db,
    size_t noise_offset = 0);
HoaSignal mix_at_snr(const HoaSignal& primary, const HoaSignal& noise,
                     double snr_db, size_t noise_offset = 0);

// Consecutive non-overlapping segments of exactly round(seconds * rate)
// samples; the trailing remainder is dropped. A signal shorter than one
// segment yields an empty list.
std::vector<HoaSignal> segment(const HoaSignal& signal, double seconds);

}  // namespace hoadoa

#endif  // HOADOA_DSP_HPP_
