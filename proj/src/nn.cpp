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

#include "hoadoa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "hoadoa/tensor_file.hpp"

namespace hoadoa::nn {
namespace {

constexpr double kBnEps = 1e-5;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void fill_uniform(Rng& rng, double* out, size_t count, double fan_in) {
  const double limit = std::sqrt(3.0 / fan_in);
  for (size_t i = 0; i < count; ++i) out[i] = rng.uniform(-limit, limit);
}

void check_rank3(const Shape& in, size_t channels, const std::string& who) {
  require(in.size() == 3, who + ": expected a rank-3 input");
  require(channels == 0 || in[2] == channels,
          who + ": channel count mismatch");
}

}  // namespace

Tensor::Tensor(Shape s) : shape(std::move(s)) {
  data.assign(shape_elements(shape), 0.0);
}

size_t shape_elements(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor Layer::backward(const Tensor&, const Tensor&,
                       std::vector<double>*) const {
  throw std::logic_error(name() + ": backward not implemented");
}

void Layer::init_params(Rng&) {}

// ---- Conv2D ----------------------------------------------------------------

Conv2D::Conv2D(size_t in_channels, size_t out_channels)
    : in_channels_(in_channels), out_channels_(out_channels) {
  require(in_channels > 0 && out_channels > 0, "conv2d: zero channel count");
  params_.assign(9 * in_channels * out_channels + out_channels, 0.0);
}

std::string Conv2D::name() const { return "conv2d"; }

Shape Conv2D::output_shape(const Shape& in) const {
  check_rank3(in, in_channels_, "conv2d");
  return {in[0], in[1], out_channels_};
}

Tensor Conv2D::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const size_t frames = in.shape[0];
  const size_t bins = in.shape[1];
  const double* w = params_.data();
  const double* b = params_.data() + 9 * in_channels_ * out_channels_;
  for (size_t i = 0; i < frames * bins; ++i)
    for (size_t oc = 0; oc < out_channels_; ++oc)
      out.data[i * out_channels_ + oc] = b[oc];
  for (size_t t = 0; t < frames; ++t) {
    for (size_t dt = 0; dt < 3; ++dt) {
      if (t + dt < 1 || t + dt > frames) continue;
      const size_t st = t + dt - 1;
      for (size_t f = 0; f < bins; ++f) {
        double* orow = &out.data[(t * bins + f) * out_channels_];
        for (size_t df = 0; df < 3; ++df) {
          if (f + df < 1 || f + df > bins) continue;
          const double* x = &in.data[(st * bins + f + df - 1) * in_channels_];
          const double* tap = &w[(dt * 3 + df) * in_channels_ * out_channels_];
          for (size_t ic = 0; ic < in_channels_; ++ic) {
            const double xv = x[ic];
            const double* wrow = &tap[ic * out_channels_];
            for (size_t oc = 0; oc < out_channels_; ++oc)
              orow[oc] += xv * wrow[oc];
          }
        }
      }
    }
  }
  return out;
}

Tensor Conv2D::backward(const Tensor& in, const Tensor& grad_out,
                        std::vector<double>* param_grad) const {
  Tensor grad_in(in.shape);
  const size_t frames = in.shape[0];
  const size_t bins = in.shape[1];
  const double* w = params_.data();
  double* dw = param_grad ? param_grad->data() : nullptr;
  double* db =
      param_grad ? param_grad->data() + 9 * in_channels_ * out_channels_
                 : nullptr;
  for (size_t t = 0; t < frames; ++t) {
    for (size_t f = 0; f < bins; ++f) {
      const double* g = &grad_out.data[(t * bins + f) * out_channels_];
      if (db)
        for (size_t oc = 0; oc < out_channels_; ++oc) db[oc] += g[oc];
      for (size_t dt = 0; dt < 3; ++dt) {
        if (t + dt < 1 || t + dt > frames) continue;
        const size_t st = t + dt - 1;
        for (size_t df = 0; df < 3; ++df) {
          if (f + df < 1 || f + df > bins) continue;
          const size_t src = (st * bins + f + df - 1) * in_channels_;
          const double* tap = &w[(dt * 3 + df) * in_channels_ * out_channels_];
          double* dtap =
              dw ? &dw[(dt * 3 + df) * in_channels_ * out_channels_] : nullptr;
          for (size_t ic = 0; ic < in_channels_; ++ic) {
            const double* wrow = &tap[ic * out_channels_];
            double acc = 0.0;
            for (size_t oc = 0; oc < out_channels_; ++oc)
              acc += g[oc] * wrow[oc];
            grad_in.data[src + ic] += acc;
            if (dtap) {
              const double xv = in.data[src + ic];
              double* drow = &dtap[ic * out_channels_];
              for (size_t oc = 0; oc < out_channels_; ++oc)
                drow[oc] += xv * g[oc];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

void Conv2D::init_params(Rng& rng) {
  fill_uniform(rng, params_.data(), 9 * in_channels_ * out_channels_,
               static_cast<double>(9 * in_channels_));
  std::fill(params_.begin() + 9 * in_channels_ * out_channels_, params_.end(),
            0.0);
}

// ---- BatchNorm -------------------------------------------------------------

BatchNorm::BatchNorm(size_t channels) : channels_(channels) {
  require(channels > 0, "batchnorm: zero channel count");
  params_.assign(2 * channels, 0.0);
  std::fill(params_.begin(), params_.begin() + channels, 1.0);  // gamma
  running_mean_.assign(channels, 0.0);
  running_var_.assign(channels, 1.0);
}

std::string BatchNorm::name() const { return "batchnorm"; }

Shape BatchNorm::output_shape(const Shape& in) const {
  require(!in.empty() && in.back() == channels_,
          "batchnorm: channel count mismatch");
  return in;
}

Tensor BatchNorm::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const double* gamma = params_.data();
  const double* beta = params_.data() + channels_;
  for (size_t i = 0; i < in.data.size(); ++i) {
    const size_t c = i % channels_;
    out.data[i] = gamma[c] * (in.data[i] - running_mean_[c]) /
                      std::sqrt(running_var_[c] + kBnEps) +
                  beta[c];
  }
  return out;
}

Tensor BatchNorm::backward(const Tensor& in, const Tensor& grad_out,
                           std::vector<double>* param_grad) const {
  Tensor grad_in(in.shape);
  const double* gamma = params_.data();
  for (size_t i = 0; i < in.data.size(); ++i) {
    const size_t c = i % channels_;
    const double inv_std = 1.0 / std::sqrt(running_var_[c] + kBnEps);
    grad_in.data[i] = grad_out.data[i] * gamma[c] * inv_std;
    if (param_grad) {
      (*param_grad)[c] +=
          grad_out.data[i] * (in.data[i] - running_mean_[c]) * inv_std;
      (*param_grad)[channels_ + c] += grad_out.data[i];
    }
  }
  return grad_in;
}

void BatchNorm::observe(const Tensor& batch) {
  output_shape(batch.shape);
  const size_t groups = batch.data.size() / channels_;
  require(groups > 0, "batchnorm: empty batch");
  for (size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    for (size_t g = 0; g < groups; ++g) mean += batch.data[g * channels_ + c];
    mean /= static_cast<double>(groups);
    double var = 0.0;
    for (size_t g = 0; g < groups; ++g) {
      const double d = batch.data[g * channels_ + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(groups);
    running_mean_[c] = 0.99 * running_mean_[c] + 0.01 * mean;
    running_var_[c] = 0.99 * running_var_[c] + 0.01 * var;
  }
}

// ---- Elu -------------------------------------------------------------------

std::string Elu::name() const { return "elu"; }

Shape Elu::output_shape(const Shape& in) const {
  require(!in.empty(), "elu: empty shape");
  return in;
}

Tensor Elu::forward(const Tensor& in) const {
  Tensor out(in.shape);
  for (size_t i = 0; i < in.data.size(); ++i) {
    const double x = in.data[i];
    out.data[i] = x > 0.0 ? x : std::expm1(x);
  }
  return out;
}

Tensor Elu::backward(const Tensor& in, const Tensor& grad_out,
                     std::vector<double>*) const {
  Tensor grad_in(in.shape);
  for (size_t i = 0; i < in.data.size(); ++i) {
    const double x = in.data[i];
    grad_in.data[i] = grad_out.data[i] * (x > 0.0 ? 1.0 : std::exp(x));
  }
  return grad_in;
}

// ---- MaxPoolFreq -----------------------------------------------------------

MaxPoolFreq::MaxPoolFreq(size_t k) : k_(k) {
  require(k > 0, "maxpool: zero window");
}

std::string MaxPoolFreq::name() const { return "maxpool"; }

Shape MaxPoolFreq::output_shape(const Shape& in) const {
  check_rank3(in, 0, "maxpool");
  require(in[1] % k_ == 0, "maxpool: bins not divisible by the window");
  return {in[0], in[1] / k_, in[2]};
}

Tensor MaxPoolFreq::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const size_t bins = in.shape[1];
  const size_t channels = in.shape[2];
  const size_t out_bins = bins / k_;
  for (size_t t = 0; t < in.shape[0]; ++t) {
    for (size_t fo = 0; fo < out_bins; ++fo) {
      for (size_t c = 0; c < channels; ++c) {
        double best = in.data[(t * bins + fo * k_) * channels + c];
        for (size_t j = 1; j < k_; ++j)
          best = std::max(best,
                          in.data[(t * bins + fo * k_ + j) * channels + c]);
        out.data[(t * out_bins + fo) * channels + c] = best;
      }
    }
  }
  return out;
}

Tensor MaxPoolFreq::backward(const Tensor& in, const Tensor& grad_out,
                             std::vector<double>*) const {
  Tensor grad_in(in.shape);
  const size_t bins = in.shape[1];
  const size_t channels = in.shape[2];
  const size_t out_bins = bins / k_;
  for (size_t t = 0; t < in.shape[0]; ++t) {
    for (size_t fo = 0; fo < out_bins; ++fo) {
      for (size_t c = 0; c < channels; ++c) {
        size_t arg = fo * k_;
        double best = in.data[(t * bins + arg) * channels + c];
        for (size_t j = 1; j < k_; ++j) {
          const double v = in.data[(t * bins + fo * k_ + j) * channels + c];
          if (v > best) {
            best = v;
            arg = fo * k_ + j;
          }
        }
        grad_in.data[(t * bins + arg) * channels + c] +=
            grad_out.data[(t * out_bins + fo) * channels + c];
      }
    }
  }
  return grad_in;
}

// ---- Dropout ---------------------------------------------------------------

Dropout::Dropout(double rate) : rate_(rate) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate outside [0, 1)");
}

std::string Dropout::name() const { return "dropout"; }

Shape Dropout::output_shape(const Shape& in) const {
  require(!in.empty(), "dropout: empty shape");
  return in;
}

Tensor Dropout::forward(const Tensor& in) const { return in; }

Tensor Dropout::backward(const Tensor&, const Tensor& grad_out,
                         std::vector<double>*) const {
  return grad_out;
}

// ---- ReshapeMerge ----------------------------------------------------------

std::string ReshapeMerge::name() const { return "reshape"; }

Shape ReshapeMerge::output_shape(const Shape& in) const {
  check_rank3(in, 0, "reshape");
  return {in[0], in[1] * in[2]};
}

Tensor ReshapeMerge::forward(const Tensor& in) const {
  Tensor out;
  out.shape = output_shape(in.shape);
  out.data = in.data;
  return out;
}

Tensor ReshapeMerge::backward(const Tensor& in, const Tensor& grad_out,
                              std::vector<double>*) const {
  Tensor grad_in;
  grad_in.shape = in.shape;
  grad_in.data = grad_out.data;
  return grad_in;
}

// ---- BiLstm ----------------------------------------------------------------

BiLstm::BiLstm(size_t input_dim, size_t units)
    : input_dim_(input_dim), units_(units) {
  require(input_dim > 0 && units > 0, "bilstm: zero dimension");
  params_.assign(2 * (4 * units * input_dim + 4 * units * units + 4 * units),
                 0.0);
}

std::string BiLstm::name() const { return "bilstm"; }

Shape BiLstm::output_shape(const Shape& in) const {
  require(in.size() == 2 && in[1] == input_dim_,
          "bilstm: expected (frames, " + std::to_string(input_dim_) + ")");
  return {in[0], 2 * units_};
}

Tensor BiLstm::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const size_t frames = in.shape[0];
  const size_t u = units_;
  const size_t dir_stride = 4 * u * input_dim_ + 4 * u * u + 4 * u;
  std::vector<double> h(u), c(u), z(4 * u);
  for (int dir = 0; dir < 2; ++dir) {
    const bool reverse = dir == 1;
    const double* w = params_.data() + (reverse ? dir_stride : 0);
    const double* rw = w + 4 * u * input_dim_;
    const double* b = rw + 4 * u * u;
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (size_t step = 0; step < frames; ++step) {
      const size_t t = reverse ? frames - 1 - step : step;
      const double* x = &in.data[t * input_dim_];
      for (size_t g = 0; g < 4 * u; ++g) {
        double acc = b[g];
        const double* wrow = &w[g * input_dim_];
        for (size_t d = 0; d < input_dim_; ++d) acc += wrow[d] * x[d];
        const double* rrow = &rw[g * u];
        for (size_t j = 0; j < u; ++j) acc += rrow[j] * h[j];
        z[g] = acc;
      }
      for (size_t j = 0; j < u; ++j) {
        const double gi = sigmoid(z[j]);
        const double gf = sigmoid(z[u + j]);
        const double gc = std::tanh(z[2 * u + j]);
        const double go = sigmoid(z[3 * u + j]);
        c[j] = gf * c[j] + gi * gc;
        h[j] = go * std::tanh(c[j]);
      }
      double* orow = &out.data[t * 2 * u + (reverse ? u : 0)];
      std::copy(h.begin(), h.end(), orow);
    }
  }
  return out;
}

Tensor BiLstm::backward(const Tensor& in, const Tensor& grad_out,
                        std::vector<double>* param_grad) const {
  Tensor grad_in(in.shape);
  const size_t frames = in.shape[0];
  const size_t d_in = input_dim_;
  const size_t u = units_;
  const size_t dir_stride = 4 * u * d_in + 4 * u * u + 4 * u;
  // Forward state replayed per direction, indexed by step (not frame).
  std::vector<double> zs(frames * 4 * u), cs(frames * u), hs(frames * u);
  std::vector<double> h(u), c(u), dh(u), dc(u), dz(4 * u);
  for (int dir = 0; dir < 2; ++dir) {
    const bool reverse = dir == 1;
    const double* w = params_.data() + (reverse ? dir_stride : 0);
    const double* rw = w + 4 * u * d_in;
    const double* b = rw + 4 * u * u;
    double* gw = param_grad
                     ? param_grad->data() + (reverse ? dir_stride : 0)
                     : nullptr;
    double* grw = gw ? gw + 4 * u * d_in : nullptr;
    double* gb = grw ? grw + 4 * u * u : nullptr;
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (size_t step = 0; step < frames; ++step) {
      const size_t t = reverse ? frames - 1 - step : step;
      const double* x = &in.data[t * d_in];
      double* z = &zs[step * 4 * u];
      for (size_t g = 0; g < 4 * u; ++g) {
        double acc = b[g];
        const double* wrow = &w[g * d_in];
        for (size_t d = 0; d < d_in; ++d) acc += wrow[d] * x[d];
        const double* rrow = &rw[g * u];
        for (size_t j = 0; j < u; ++j) acc += rrow[j] * h[j];
        z[g] = acc;
      }
      for (size_t j = 0; j < u; ++j) {
        c[j] = sigmoid(z[u + j]) * c[j] + sigmoid(z[j]) * std::tanh(z[2 * u + j]);
        h[j] = sigmoid(z[3 * u + j]) * std::tanh(c[j]);
      }
      std::copy(c.begin(), c.end(), &cs[step * u]);
      std::copy(h.begin(), h.end(), &hs[step * u]);
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    std::fill(dc.begin(), dc.end(), 0.0);
    for (size_t step = frames; step-- > 0;) {
      const size_t t = reverse ? frames - 1 - step : step;
      const double* x = &in.data[t * d_in];
      const double* z = &zs[step * 4 * u];
      const double* c_prev = step > 0 ? &cs[(step - 1) * u] : nullptr;
      const double* h_prev = step > 0 ? &hs[(step - 1) * u] : nullptr;
      for (size_t j = 0; j < u; ++j)
        dh[j] += grad_out.data[t * 2 * u + (reverse ? u : 0) + j];
      for (size_t j = 0; j < u; ++j) {
        const double gi = sigmoid(z[j]);
        const double gf = sigmoid(z[u + j]);
        const double gc = std::tanh(z[2 * u + j]);
        const double go = sigmoid(z[3 * u + j]);
        const double tc = std::tanh(cs[step * u + j]);
        const double dcell = dc[j] + dh[j] * go * (1.0 - tc * tc);
        dz[j] = dcell * gc * gi * (1.0 - gi);
        dz[u + j] = dcell * (c_prev ? c_prev[j] : 0.0) * gf * (1.0 - gf);
        dz[2 * u + j] = dcell * gi * (1.0 - gc * gc);
        dz[3 * u + j] = dh[j] * tc * go * (1.0 - go);
        dc[j] = dcell * gf;
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      double* gin = &grad_in.data[t * d_in];
      for (size_t g = 0; g < 4 * u; ++g) {
        const double dzg = dz[g];
        const double* wrow = &w[g * d_in];
        for (size_t d = 0; d < d_in; ++d) gin[d] += wrow[d] * dzg;
        const double* rrow = &rw[g * u];
        for (size_t j = 0; j < u; ++j) dh[j] += rrow[j] * dzg;
        if (gw) {
          double* gwrow = &gw[g * d_in];
          for (size_t d = 0; d < d_in; ++d) gwrow[d] += dzg * x[d];
          if (h_prev) {
            double* grrow = &grw[g * u];
            for (size_t j = 0; j < u; ++j) grrow[j] += dzg * h_prev[j];
          }
          gb[g] += dzg;
        }
      }
    }
  }
  return grad_in;
}

void BiLstm::init_params(Rng& rng) {
  const size_t u = units_;
  const size_t dir_stride = 4 * u * input_dim_ + 4 * u * u + 4 * u;
  for (int dir = 0; dir < 2; ++dir) {
    double* base = params_.data() + dir * dir_stride;
    fill_uniform(rng, base, 4 * u * input_dim_,
                 static_cast<double>(input_dim_));
    fill_uniform(rng, base + 4 * u * input_dim_, 4 * u * u,
                 static_cast<double>(u));
    std::fill(base + 4 * u * input_dim_ + 4 * u * u, base + dir_stride, 0.0);
  }
}

// ---- TimeDistributedDense --------------------------------------------------

TimeDistributedDense::TimeDistributedDense(size_t in_dim, size_t out_dim,
                                           Activation act)
    : in_dim_(in_dim), out_dim_(out_dim), act_(act) {
  require(in_dim > 0 && out_dim > 0, "dense: zero dimension");
  params_.assign(in_dim * out_dim + out_dim, 0.0);
}

std::string TimeDistributedDense::name() const { return "dense"; }

Shape TimeDistributedDense::output_shape(const Shape& in) const {
  require(in.size() == 2 && in[1] == in_dim_,
          "dense: expected (frames, " + std::to_string(in_dim_) + ")");
  return {in[0], out_dim_};
}

Tensor TimeDistributedDense::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const size_t frames = in.shape[0];
  const double* w = params_.data();
  const double* b = params_.data() + in_dim_ * out_dim_;
  for (size_t t = 0; t < frames; ++t) {
    double* orow = &out.data[t * out_dim_];
    for (size_t o = 0; o < out_dim_; ++o) orow[o] = b[o];
    const double* x = &in.data[t * in_dim_];
    for (size_t d = 0; d < in_dim_; ++d) {
      const double xv = x[d];
      const double* wrow = &w[d * out_dim_];
      for (size_t o = 0; o < out_dim_; ++o) orow[o] += xv * wrow[o];
    }
    if (act_ == Activation::kElu)
      for (size_t o = 0; o < out_dim_; ++o)
        orow[o] = orow[o] > 0.0 ? orow[o] : std::expm1(orow[o]);
  }
  return out;
}

Tensor TimeDistributedDense::backward(const Tensor& in,
                                      const Tensor& grad_out,
                                      std::vector<double>* param_grad) const {
  Tensor grad_in(in.shape);
  const size_t frames = in.shape[0];
  const double* w = params_.data();
  const double* b = params_.data() + in_dim_ * out_dim_;
  std::vector<double> dz(out_dim_);
  for (size_t t = 0; t < frames; ++t) {
    const double* x = &in.data[t * in_dim_];
    const double* g = &grad_out.data[t * out_dim_];
    // Recompute the pre-activation to apply the activation derivative.
    for (size_t o = 0; o < out_dim_; ++o) dz[o] = b[o];
    for (size_t d = 0; d < in_dim_; ++d) {
      const double xv = x[d];
      const double* wrow = &w[d * out_dim_];
      for (size_t o = 0; o < out_dim_; ++o) dz[o] += xv * wrow[o];
    }
    for (size_t o = 0; o < out_dim_; ++o) {
      const double slope =
          act_ == Activation::kElu ? (dz[o] > 0.0 ? 1.0 : std::exp(dz[o]))
                                   : 1.0;
      dz[o] = g[o] * slope;
    }
    for (size_t d = 0; d < in_dim_; ++d) {
      const double* wrow = &w[d * out_dim_];
      double acc = 0.0;
      for (size_t o = 0; o < out_dim_; ++o) acc += dz[o] * wrow[o];
      grad_in.data[t * in_dim_ + d] = acc;
      if (param_grad) {
        double* drow = &(*param_grad)[d * out_dim_];
        for (size_t o = 0; o < out_dim_; ++o) drow[o] += x[d] * dz[o];
      }
    }
    if (param_grad)
      for (size_t o = 0; o < out_dim_; ++o)
        (*param_grad)[in_dim_ * out_dim_ + o] += dz[o];
  }
  return grad_in;
}

void TimeDistributedDense::init_params(Rng& rng) {
  fill_uniform(rng, params_.data(), in_dim_ * out_dim_,
               static_cast<double>(in_dim_));
  std::fill(params_.begin() + in_dim_ * out_dim_, params_.end(), 0.0);
}

// ---- UnitNorm --------------------------------------------------------------

std::string UnitNorm::name() const { return "unitnorm"; }

Shape UnitNorm::output_shape(const Shape& in) const {
  require(in.size() == 2 && in[1] == 3, "unitnorm: expected (frames, 3)");
  return in;
}

Tensor UnitNorm::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  for (size_t t = 0; t < in.shape[0]; ++t) {
    const double* x = &in.data[t * 3];
    double* y = &out.data[t * 3];
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r == 0.0) {
      y[0] = 0.0;
      y[1] = 0.0;
      y[2] = 1.0;
    } else {
      y[0] = x[0] / r;
      y[1] = x[1] / r;
      y[2] = x[2] / r;
    }
  }
  return out;
}

Tensor UnitNorm::backward(const Tensor& in, const Tensor& grad_out,
                          std::vector<double>*) const {
  Tensor grad_in(in.shape);
  for (size_t t = 0; t < in.shape[0]; ++t) {
    const double* x = &in.data[t * 3];
    const double* g = &grad_out.data[t * 3];
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r == 0.0) continue;  // constant branch
    const double yg =
        (x[0] * g[0] + x[1] * g[1] + x[2] * g[2]) / (r * r);
    for (int a = 0; a < 3; ++a)
      grad_in.data[t * 3 + a] = (g[a] - x[a] * yg) / r;
  }
  return grad_in;
}

// ---- FreqAveragePool -------------------------------------------------------

std::string FreqAveragePool::name() const { return "freqpool"; }

Shape FreqAveragePool::output_shape(const Shape& in) const {
  check_rank3(in, 0, "freqpool");
  require(in[1] > 0, "freqpool: zero bins");
  return {in[0], in[2]};
}

Tensor FreqAveragePool::forward(const Tensor& in) const {
  Tensor out(output_shape(in.shape));
  const size_t bins = in.shape[1];
  const size_t channels = in.shape[2];
  for (size_t t = 0; t < in.shape[0]; ++t) {
    double* orow = &out.data[t * channels];
    for (size_t f = 0; f < bins; ++f) {
      const double* x = &in.data[(t * bins + f) * channels];
      for (size_t c = 0; c < channels; ++c) orow[c] += x[c];
    }
    for (size_t c = 0; c < channels; ++c)
      orow[c] /= static_cast<double>(bins);
  }
  return out;
}

Tensor FreqAveragePool::backward(const Tensor& in, const Tensor& grad_out,
                                 std::vector<double>*) const {
  Tensor grad_in(in.shape);
  const size_t bins = in.shape[1];
  const size_t channels = in.shape[2];
  for (size_t t = 0; t < in.shape[0]; ++t) {
    const double* g = &grad_out.data[t * channels];
    for (size_t f = 0; f < bins; ++f) {
      double* row = &grad_in.data[(t * bins + f) * channels];
      for (size_t c = 0; c < channels; ++c)
        row[c] = g[c] / static_cast<double>(bins);
    }
  }
  return grad_in;
}

// ---- Configuration and stack -----------------------------------------------

size_t NNConfig::dim_in() const {
  if (feature == FeatureKind::kIntensity) return 6;
  return 2 * static_cast<size_t>((order + 1) * (order + 1));
}

void NNConfig::validate() const {
  if (feature == FeatureKind::kMagphase)
    require(order >= 1 && order <= 4, "nnconfig: order outside [1, 4]");
  const bool filter_ok = n_filter == 32 || n_filter == 64 || n_filter == 128 ||
                         n_filter == 256 || n_filter == 512 ||
                         n_filter == 1024;
  require(filter_ok, "nnconfig: n_filter not in {32..1024} powers of two");
  require(frames > 0, "nnconfig: zero frames");
  require(bins > 0 && bins % 256 == 0,
          "nnconfig: bins must divide by the pooling factor 256");
}

Shape LayerStack::output_shape() const {
  Shape s = input_shape;
  for (const auto& layer : layers) s = layer->output_shape(s);
  return s;
}

std::vector<std::pair<std::string, Shape>> LayerStack::shape_table() const {
  std::vector<std::pair<std::string, Shape>> table;
  table.emplace_back("input", input_shape);
  Shape s = input_shape;
  for (const auto& layer : layers) {
    s = layer->output_shape(s);
    table.emplace_back(layer->name(), s);
  }
  return table;
}

Tensor LayerStack::forward(const Tensor& in) const {
  require(in.shape == input_shape,
          "forward: input shape " + shape_string(in.shape) +
              " does not match " + shape_string(input_shape));
  Tensor x = in;
  for (const auto& layer : layers) x = layer->forward(x);
  return x;
}

std::vector<std::pair<std::string, Shape>> plan_crnn(const NNConfig& cfg) {
  cfg.validate();
  const size_t t = cfg.frames;
  const size_t nf = cfg.n_filter;
  std::vector<std::pair<std::string, Shape>> plan;
  plan.emplace_back("input", Shape{t, cfg.bins, cfg.dim_in()});
  size_t bins = cfg.bins;
  for (size_t pool : {8, 8, 4}) {
    plan.emplace_back("conv2d", Shape{t, bins, nf});
    plan.emplace_back("batchnorm", Shape{t, bins, nf});
    plan.emplace_back("elu", Shape{t, bins, nf});
    bins /= pool;
    plan.emplace_back("maxpool", Shape{t, bins, nf});
    plan.emplace_back("dropout", Shape{t, bins, nf});
  }
  plan.emplace_back("reshape", Shape{t, bins * nf});
  plan.emplace_back("bilstm", Shape{t, 2 * nf});
  plan.emplace_back("bilstm", Shape{t, 2 * nf});
  plan.emplace_back("dense", Shape{t, 2 * nf});
  plan.emplace_back("dropout", Shape{t, 2 * nf});
  plan.emplace_back("dense", Shape{t, 3});
  plan.emplace_back("unitnorm", Shape{t, 3});
  return plan;
}

LayerStack build_crnn(const NNConfig& cfg, uint64_t seed) {
  cfg.validate();
  const size_t nf = cfg.n_filter;
  LayerStack stack;
  stack.input_shape = {cfg.frames, cfg.bins, cfg.dim_in()};
  size_t in_ch = cfg.dim_in();
  for (size_t pool : {8, 8, 4}) {
    stack.layers.push_back(std::make_unique<Conv2D>(in_ch, nf));
    stack.layers.push_back(std::make_unique<BatchNorm>(nf));
    stack.layers.push_back(std::make_unique<Elu>());
    stack.layers.push_back(std::make_unique<MaxPoolFreq>(pool));
    stack.layers.push_back(std::make_unique<Dropout>(0.2));
    in_ch = nf;
  }
  stack.layers.push_back(std::make_unique<ReshapeMerge>());
  const size_t merged = (cfg.bins / 256) * nf;
  stack.layers.push_back(std::make_unique<BiLstm>(merged, nf));
  stack.layers.push_back(std::make_unique<BiLstm>(2 * nf, nf));
  stack.layers.push_back(
      std::make_unique<TimeDistributedDense>(2 * nf, 2 * nf,
                                             Activation::kElu));
  stack.layers.push_back(std::make_unique<Dropout>(0.2));
  stack.layers.push_back(
      std::make_unique<TimeDistributedDense>(2 * nf, 3, Activation::kLinear));
  stack.layers.push_back(std::make_unique<UnitNorm>());
  for (size_t k = 0; k < stack.layers.size(); ++k) {
    Rng rng(mix_seed(seed, k));
    stack.layers[k]->init_params(rng);
  }
  return stack;
}

Tensor forward(const LayerStack& stack, const FeatureTensor& input) {
  Tensor x;
  x.shape = {input.frames, input.bins, input.channels};
  x.data = input.data;
  require(x.data.size() == shape_elements(x.shape),
          "forward: feature tensor data does not match its dims");
  return stack.forward(x);
}

// ---- Loss and gradient check -----------------------------------------------

MseResult mse_loss(const Tensor& pred, const Direction& target) {
  require(pred.shape.size() == 2 && pred.shape[1] == 3 && pred.shape[0] > 0,
          "mse_loss: expected (frames, 3) predictions");
  const Vec3 u = target.unit_vector();
  const double axes[3] = {u.x, u.y, u.z};
  MseResult result;
  result.grad = Tensor(pred.shape);
  const double n = static_cast<double>(pred.data.size());
  for (size_t t = 0; t < pred.shape[0]; ++t) {
    for (int a = 0; a < 3; ++a) {
      const double d = pred.data[t * 3 + a] - axes[a];
      result.loss += d * d / n;
      result.grad.data[t * 3 + a] = 2.0 * d / n;
    }
  }
  return result;
}

double grad_check(Layer& layer, const Tensor& point, double eps,
                  uint64_t seed) {
  Tensor x = point;
  const Shape out_shape = layer.output_shape(x.shape);
  Rng rng(mix_seed(seed, 0x67726164636B00ULL));
  Tensor probe_dir(out_shape);
  for (double& v : probe_dir.data) v = rng.uniform(-1.0, 1.0);
  const auto objective = [&]() {
    const Tensor out = layer.forward(x);
    double j = 0.0;
    for (size_t i = 0; i < out.data.size(); ++i)
      j += out.data[i] * probe_dir.data[i];
    return j;
  };
  std::vector<double> param_grad(layer.params().size(), 0.0);
  const Tensor grad_in = layer.backward(x, probe_dir, &param_grad);

  double worst = 0.0;
  const auto probe = [&](double* slot, double analytic) {
    const double keep = *slot;
    *slot = keep + eps;
    const double jp = objective();
    *slot = keep - eps;
    const double jm = objective();
    *slot = keep;
    const double numeric = (jp - jm) / (2.0 * eps);
    const double rel = std::abs(analytic - numeric) /
                       std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    worst = std::max(worst, rel);
  };
  const auto sample = [&](size_t n) {
    std::vector<size_t> idx;
    if (n <= 64) {
      idx.resize(n);
      std::iota(idx.begin(), idx.end(), size_t{0});
    } else {
      for (size_t i = 0; i < 64; ++i) idx.push_back(rng.uniform_int(n));
    }
    return idx;
  };
  for (size_t i : sample(x.data.size())) probe(&x.data[i], grad_in.data[i]);
  for (size_t i : sample(layer.params().size()))
    probe(&layer.params()[i], param_grad[i]);
  return worst;
}

// ---- Toy head --------------------------------------------------------------

Tensor ToyHead::forward(const FeatureTensor& input) const {
  return nn::forward(stack, input);
}

Direction ToyHead::predict(const FeatureTensor& input) const {
  const Tensor out = forward(input);
  Vec3 mean{};
  for (size_t t = 0; t < out.shape[0]; ++t) {
    mean.x += out.data[t * 3];
    mean.y += out.data[t * 3 + 1];
    mean.z += out.data[t * 3 + 2];
  }
  if (norm(mean) == 0.0) return Direction(kPi / 2.0, 0.0);
  return Direction::from_unit_vector(mean);
}

ToyHead make_toy_head(size_t frames, size_t bins, size_t channels,
                      size_t hidden, uint64_t seed) {
  require(frames > 0 && bins > 0 && channels > 0 && hidden > 0,
          "toy head: zero dimension");
  ToyHead head;
  head.frames = frames;
  head.bins = bins;
  head.channels = channels;
  head.hidden = hidden;
  head.stack.input_shape = {frames, bins, channels};
  head.stack.layers.push_back(std::make_unique<FreqAveragePool>());
  head.stack.layers.push_back(
      std::make_unique<TimeDistributedDense>(channels, hidden,
                                             Activation::kElu));
  head.stack.layers.push_back(
      std::make_unique<TimeDistributedDense>(hidden, 3, Activation::kLinear));
  head.stack.layers.push_back(std::make_unique<UnitNorm>());
  for (size_t k = 0; k < head.stack.layers.size(); ++k) {
    Rng rng(mix_seed(seed, k));
    head.stack.layers[k]->init_params(rng);
  }
  return head;
}

namespace {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad,
            const ToyTrainConfig& cfg, size_t t) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
};

}  // namespace

ToyTrainResult train_toy_head(const std::vector<FeatureTensor>& features,
                              const std::vector<Direction>& labels,
                              const ToyTrainConfig& cfg) {
  require(!features.empty(), "train: no examples");
  require(features.size() == labels.size(), "train: label count mismatch");
  require(cfg.batch > 0, "train: zero batch size");
  const size_t frames = features[0].frames;
  const size_t bins = features[0].bins;
  const size_t channels = features[0].channels;
  for (const FeatureTensor& f : features)
    require(f.frames == frames && f.bins == bins && f.channels == channels,
            "train: examples disagree in shape");

  ToyTrainResult result;
  result.head =
      make_toy_head(frames, bins, channels, cfg.hidden, mix_seed(cfg.seed, 0));
  Layer& dense1 = *result.head.stack.layers[1];
  Layer& dense2 = *result.head.stack.layers[2];
  Layer& unit = *result.head.stack.layers[3];

  // The pooled inputs never change; compute them once.
  const FreqAveragePool pool;
  std::vector<Tensor> pooled;
  pooled.reserve(features.size());
  for (const FeatureTensor& f : features) {
    Tensor x;
    x.shape = {f.frames, f.bins, f.channels};
    x.data = f.data;
    pooled.push_back(pool.forward(x));
  }

  AdamState adam1(dense1.params().size());
  AdamState adam2(dense2.params().size());
  std::vector<double> grad1(dense1.params().size());
  std::vector<double> grad2(dense2.params().size());
  std::vector<size_t> order(features.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t step = 0;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, 1 + epoch));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      const size_t stop = std::min(start + cfg.batch, order.size());
      std::fill(grad1.begin(), grad1.end(), 0.0);
      std::fill(grad2.begin(), grad2.end(), 0.0);
      for (size_t k = start; k < stop; ++k) {
        const Tensor& a1 = pooled[order[k]];
        const Tensor a2 = dense1.forward(a1);
        const Tensor a3 = dense2.forward(a2);
        const Tensor a4 = unit.forward(a3);
        const MseResult mse = mse_loss(a4, labels[order[k]]);
        if (!std::isfinite(mse.loss)) {
          result.diverged = true;
          result.loss_trace.push_back(mse.loss);
          return result;
        }
        epoch_loss += mse.loss;
        const Tensor g3 = unit.backward(a3, mse.grad, nullptr);
        const Tensor g2 = dense2.backward(a2, g3, &grad2);
        dense1.backward(a1, g2, &grad1);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad1) g *= inv;
      for (double& g : grad2) g *= inv;
      ++step;
      adam1.step(dense1.params(), grad1, cfg, step);
      adam2.step(dense2.params(), grad2, cfg, step);
    }
    result.loss_trace.push_back(epoch_loss /
                                static_cast<double>(order.size()));
  }
  return result;
}

// ---- Serialization ---------------------------------------------------------

namespace {

constexpr const char* kHeadFormat = "hoadoa-toyhead";

TensorData params_to_tensor(const std::vector<double>& params) {
  TensorData t;
  t.dims = {static_cast<uint32_t>(params.size())};
  t.data.reserve(params.size());
  for (double v : params) t.data.push_back(static_cast<float>(v));
  return t;
}

}  // namespace

void save_toy_head(const ToyHead& head, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::vector<double>& p1 = head.stack.layers[1]->params();
  const std::vector<double>& p2 = head.stack.layers[2]->params();
  write_tensor((fs::path(dir) / "dense1.hoat").string(),
               params_to_tensor(p1));
  write_tensor((fs::path(dir) / "dense2.hoat").string(),
               params_to_tensor(p2));
  nlohmann::ordered_json index;
  index["format"] = kHeadFormat;
  index["version"] = 1;
  index["frames"] = head.frames;
  index["bins"] = head.bins;
  index["channels"] = head.channels;
  index["hidden"] = head.hidden;
  index["params"] = nlohmann::ordered_json::array(
      {{{"name", "dense1"}, {"file", "dense1.hoat"}, {"count", p1.size()}},
       {{"name", "dense2"}, {"file", "dense2.hoat"}, {"count", p2.size()}}});
  std::ofstream out(fs::path(dir) / "head.json",
                    std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_toy_head: cannot write " + dir);
  out << index.dump(2) << "\n";
}

ToyHead load_toy_head(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "head.json", std::ios::binary);
  if (!in)
    throw std::runtime_error("load_toy_head: missing index in " + dir);
  nlohmann::json index;
  try {
    in >> index;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_toy_head: bad index: ") +
                             e.what());
  }
  if (index.value("format", "") != kHeadFormat ||
      index.value("version", 0) != 1)
    throw std::runtime_error("load_toy_head: unsupported index format");

  ToyHead head = make_toy_head(index.at("frames").get<size_t>(),
                               index.at("bins").get<size_t>(),
                               index.at("channels").get<size_t>(),
                               index.at("hidden").get<size_t>(), 0);
  const auto& entries = index.at("params");
  if (!entries.is_array() || entries.size() != 2)
    throw std::runtime_error("load_toy_head: expected two parameter entries");
  for (size_t k = 0; k < 2; ++k) {
    const TensorData t = read_tensor(
        (fs::path(dir) / entries[k].at("file").get<std::string>()).string());
    std::vector<double>& params = head.stack.layers[1 + k]->params();
    if (t.data.size() != params.size() ||
        entries[k].at("count").get<size_t>() != params.size())
      throw std::runtime_error("load_toy_head: parameter size mismatch");
    for (size_t i = 0; i < params.size(); ++i)
      params[i] = static_cast<double>(t.data[i]);
  }
  return head;
}

}  // namespace hoadoa::nn
