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

#include "hoadoa/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hoadoa {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void check_multichannel(const std::vector<std::vector<double>>& channels,
                        const char* who) {
  if (channels.empty() || channels[0].empty())
    throw std::invalid_argument(std::string(who) + ": empty signal");
  for (const auto& c : channels)
    if (c.size() != channels[0].size())
      throw std::invalid_argument(std::string(who) +
                                  ": channels differ in length");
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& data, bool inverse) {
  const size_t n = data.size();
  if (!is_pow2(n))
    throw std::invalid_argument("fft_pow2: size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= inv_n;
  }
}

std::vector<double> make_window(Window window, size_t length) {
  std::vector<double> w(length, 1.0);
  if (window == Window::kHannPeriodic) {
    for (size_t i = 0; i < length; ++i)
      w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                   static_cast<double>(length)));
  }
  return w;
}

ComplexSpectrogram stft(const std::vector<std::vector<double>>& channels,
                        const StftConfig& cfg) {
  check_multichannel(channels, "stft");
  if (cfg.hop < 1 || cfg.window_length < 1 ||
      cfg.window_length > cfg.fft_length || !is_pow2(cfg.fft_length))
    throw std::invalid_argument("stft: invalid config");

  const size_t length = channels[0].size();
  const size_t frames = (length + cfg.hop - 1) / cfg.hop;
  const size_t bins = cfg.fft_length / 2;  // Nyquist dropped, DC kept

  ComplexSpectrogram out;
  out.frames = frames;
  out.bins = bins;
  out.channels = channels.size();
  out.data.assign(frames * bins * channels.size(), {0.0, 0.0});

  const std::vector<double> win = make_window(cfg.window, cfg.window_length);
  std::vector<std::complex<double>> buf(cfg.fft_length);
  for (size_t c = 0; c < channels.size(); ++c) {
    const auto& x = channels[c];
    for (size_t t = 0; t < frames; ++t) {
      const size_t start = t * cfg.hop;
      std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
      const size_t avail =
          start < length ? std::min(cfg.window_length, length - start) : 0;
      for (size_t i = 0; i < avail; ++i) buf[i] = x[start + i] * win[i];
      fft_pow2(buf, false);
      for (size_t f = 0; f < bins; ++f) out.at(t, f, c) = buf[f];
    }
  }
  return out;
}

ComplexSpectrogram stft(const HoaSignal& signal, const StftConfig& cfg) {
  return stft(signal.channels, cfg);
}

std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& impulse_response) {
  if (signal.empty() || impulse_response.empty())
    throw std::invalid_argument("convolve: empty input");
  const size_t la = signal.size(), lb = impulse_response.size();
  const size_t lo = la + lb - 1;

  // Direct summation beats the FFT when either operand is short.
  const size_t direct_cost = la * lb;
  const size_t nfft = next_pow2(lo);
  const size_t fft_cost = 3 * nfft * (64 - static_cast<size_t>(
                                               __builtin_clzll(nfft)));
  if (direct_cost <= fft_cost || std::min(la, lb) <= 32) {
    std::vector<double> y(lo, 0.0);
    if (la >= lb) {
      for (size_t j = 0; j < lb; ++j) {
        const double h = impulse_response[j];
        if (h == 0.0) continue;
        for (size_t i = 0; i < la; ++i) y[i + j] += signal[i] * h;
      }
    } else {
      for (size_t i = 0; i < la; ++i) {
        const double s = signal[i];
        if (s == 0.0) continue;
        for (size_t j = 0; j < lb; ++j) y[i + j] += s * impulse_response[j];
      }
    }
    return y;
  }

  std::vector<std::complex<double>> a(nfft, {0.0, 0.0}), b(nfft, {0.0, 0.0});
  for (size_t i = 0; i < la; ++i) a[i] = signal[i];
  for (size_t i = 0; i < lb; ++i) b[i] = impulse_response[i];
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (size_t i = 0; i < nfft; ++i) a[i] *= b[i];
  fft_pow2(a, true);
  std::vector<double> y(lo);
  for (size_t i = 0; i < lo; ++i) y[i] = a[i].real();
  return y;
}

HoaSignal convolve(const std::vector<double>& signal,
                   const HoaSignal& impulse_response) {
  HoaSignal out;
  out.order = impulse_response.order;
  out.sample_rate = impulse_response.sample_rate;
  out.channels.reserve(impulse_response.channels.size());
  for (const auto& ch : impulse_response.channels)
    out.channels.push_back(convolve(signal, ch));
  return out;
}

namespace {

// 121-tap Kaiser-windowed sinc, beta = 8, cutoff 1/6 of the input rate
// (the post-decimation Nyquist). Normalized to unit DC gain.
const std::vector<double>& decimation_filter() {
  static const std::vector<double> taps = [] {
    constexpr int kTaps = 121;
    constexpr int kHalf = kTaps / 2;
    constexpr double kBeta = 8.0;
    std::vector<double> h(kTaps);
    const double i0_beta = std::cyl_bessel_i(0.0, kBeta);
    double sum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const double t = static_cast<double>(k - kHalf);
      const double x = kPi * t / 3.0;
      const double sinc = (t == 0.0) ? 1.0 : std::sin(x) / x;
      const double r = t / kHalf;
      const double kaiser =
          std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      h[k] = sinc * kaiser;
      sum += h[k];
    }
    for (auto& v : h) v /= sum;
    return h;
  }();
  return taps;
}

}  // namespace

std::vector<double> resample_3to1(const std::vector<double>& signal) {
  const auto& h = decimation_filter();
  const long half = static_cast<long>(h.size() / 2);
  const long n = static_cast<long>(signal.size());
  const size_t out_len = (signal.size() + 2) / 3;
  std::vector<double> y(out_len, 0.0);
  for (size_t k = 0; k < out_len; ++k) {
    const long center = static_cast<long>(k) * 3;
    double acc = 0.0;
    for (long j = -half; j <= half; ++j) {
      const long idx = center + j;
      if (idx < 0 || idx >= n) continue;
      acc += signal[idx] * h[static_cast<size_t>(half - j)];
    }
    y[k] = acc;
  }
  return y;
}

HoaSignal resample_3to1(const HoaSignal& signal) {
  HoaSignal out;
  out.order = signal.order;
  out.sample_rate = signal.sample_rate / 3.0;
  out.channels.reserve(signal.channels.size());
  for (const auto& ch : signal.channels) out.channels.push_back(resample_3to1(ch));
  return out;
}

std::vector<std::vector<double>> mix_at_snr(
    const std::vector<std::vector<double>>& primary,
    const std::vector<std::vector<double>>& noise, double snr_db,
    size_t noise_offset) {
  check_multichannel(primary, "mix_at_snr");
  check_multichannel(noise, "mix_at_snr");
  if (noise.size() != primary.size())
    throw std::invalid_argument("mix_at_snr: channel-count mismatch");
  const size_t len = primary[0].size();
  const size_t nlen = noise[0].size();

  // Channel-0 powers over the full (looped/cropped) tracks.
  double p_primary = 0.0;
  for (double v : primary[0]) p_primary += v * v;
  double p_noise = 0.0;
  for (size_t i = 0; i < len; ++i) {
    const double v = noise[0][(noise_offset + i) % nlen];
    p_noise += v * v;
  }
  if (p_noise == 0.0)
    throw std::invalid_argument("mix_at_snr: noise silent on channel 0");

  const double gain =
      std::sqrt(p_primary / p_noise) * std::pow(10.0, -snr_db / 20.0);

  std::vector<std::vector<double>> out(primary.size());
  for (size_t c = 0; c < primary.size(); ++c) {
    out[c].resize(len);
    for (size_t i = 0; i < len; ++i)
      out[c][i] = primary[c][i] + gain * noise[c][(noise_offset + i) % nlen];
  }
  return out;
}

HoaSignal mix_at_snr(const HoaSignal& primary, const HoaSignal& noise,
                     double snr_db, size_t noise_offset) {
  HoaSignal out;
  out.order = primary.order;
  out.sample_rate = primary.sample_rate;
  out.channels = mix_at_snr(primary.channels, noise.channels, snr_db,
                            noise_offset);
  return out;
}

std::vector<HoaSignal> segment(const HoaSignal& signal, double seconds) {
  const auto samples =
      static_cast<size_t>(std::llround(seconds * signal.sample_rate));
  if (samples < 1) throw std::invalid_argument("segment: duration too short");
  const size_t count = signal.length() / samples;
  std::vector<HoaSignal> out;
  out.reserve(count);
  for (size_t s = 0; s < count; ++s) {
    HoaSignal seg;
    seg.order = signal.order;
    seg.sample_rate = signal.sample_rate;
    seg.channels.reserve(signal.channels.size());
    for (const auto& ch : signal.channels)
      seg.channels.emplace_back(ch.begin() + s * samples,
                                ch.begin() + (s + 1) * samples);
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace hoadoa
