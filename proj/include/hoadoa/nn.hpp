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
// Minimal dense-tensor neural kernel: the CRNN forward pass as a shape
// contract, unit-sphere outputs, the MSE objective, and gradient-checked
// training of a reduced head. Everything runs in double precision on flat
// row-major tensors; there is no autograd graph, layers expose explicit
// backward rules instead.

#ifndef HOADOA_NN_HPP_
#define HOADOA_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hoadoa/features.hpp"
#include "hoadoa/rng.hpp"
#include "hoadoa/sh.hpp"

namespace hoadoa::nn {

using Shape = std::vector<size_t>;

// Row-major dense tensor. Rank-3 tensors are (frames, bins, channels),
// rank-2 tensors are (frames, features).
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s);

  size_t size() const { return data.size(); }
};

size_t shape_elements(const Shape& shape);
std::string shape_string(const Shape& shape);

// A layer owns a flat parameter vector and exposes analytic forward and
// backward rules. Forward is pure: inference mode keeps no state between
// calls. backward() computes the input gradient of a scalar J given
// dJ/doutput and, when param_grad is non-null, accumulates dJ/dparams into
// it (it must already be sized params().size()). Layers that are excluded
// from training throw std::logic_error from backward().
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string name() const = 0;
  // Output shape for the given input shape; throws std::invalid_argument
  // if the input shape is not accepted.
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor forward(const Tensor& in) const = 0;
  virtual Tensor backward(const Tensor& in, const Tensor& grad_out,
                          std::vector<double>* param_grad) const;
  // Seeded parameter draw: uniform on [-sqrt(3/fan_in), sqrt(3/fan_in)]
  // per weight group, biases zero. Default is a no-op for layers without
  // parameters.
  virtual void init_params(Rng& rng);

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

 protected:
  std::vector<double> params_;
};

// 3x3 convolution over (frames, bins), stride 1, zero same-padding, channels
// last. Parameters: weights w[((dt*3+df)*in_ch+ic)*out_ch+oc] then biases.
class Conv2D : public Layer {
 public:
  Conv2D(size_t in_channels, size_t out_channels);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
  void init_params(Rng& rng) override;

 private:
  size_t in_channels_;
  size_t out_channels_;
};

// Per-channel batch normalization on the last axis. Inference uses running
// statistics (initialized to mean 0, variance 1); observe() folds a batch
// into them with momentum 0.99. Parameters: gamma (init 1) then beta
// (init 0). Backward treats the running statistics as constants, which is
// exact in inference mode.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(size_t channels);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
  void observe(const Tensor& batch);

  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

 private:
  size_t channels_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
};

// elu with alpha = 1: x for x > 0, exp(x) - 1 otherwise. The derivative is
// continuous at 0.
class Elu : public Layer {
 public:
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
};

// Max pooling over the frequency axis only (window 1 x k). The bin count
// must be divisible by k. Backward routes the gradient to the first maximum
// in each window.
class MaxPoolFreq : public Layer {
 public:
  explicit MaxPoolFreq(size_t k);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;

 private:
  size_t k_;
};

// Identity at inference; the rate is carried only for the shape table.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;

 private:
  double rate_;
};

// (frames, bins, channels) -> (frames, bins*channels), bin-major within a
// frame, matching the row-major layout.
class ReshapeMerge : public Layer {
 public:
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
};

// Bidirectional LSTM with the standard sigmoid/tanh gating, gate order
// (input, forget, cell, output), zero initial state. Output concatenates
// the forward and backward hidden states per frame. Forward-only: this
// layer is excluded from training and backward() throws.
// Parameters per direction: W (4*units x input), U (4*units x units),
// b (4*units); the forward direction block precedes the backward one.
class BiLstm : public Layer {
 public:
  BiLstm(size_t input_dim, size_t units);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
  void init_params(Rng& rng) override;

  size_t units() const { return units_; }

 private:
  size_t input_dim_;
  size_t units_;
};

enum class Activation { kElu, kLinear };

// Per-frame affine map (frames, in) -> (frames, out) with an optional elu.
// Parameters: W (in x out, row-major) then b (out).
class TimeDistributedDense : public Layer {
 public:
  TimeDistributedDense(size_t in_dim, size_t out_dim, Activation act);
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
  void init_params(Rng& rng) override;

 private:
  size_t in_dim_;
  size_t out_dim_;
  Activation act_;
};

// Scales each frame's 3-vector to unit length. A zero row (measure zero)
// maps to +z deterministically, with zero gradient on that branch.
class UnitNorm : public Layer {
 public:
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
};

// Mean over the frequency axis: (frames, bins, channels) -> (frames,
// channels). Head of the reduced trainable network.
class FreqAveragePool : public Layer {
 public:
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& in) const override;
  Tensor backward(const Tensor& in, const Tensor& grad_out,
                  std::vector<double>* param_grad) const override;
};

// Network configuration. The input channel count is fixed by the feature
// kind: 2*(order+1)^2 magnitude/phase channels or 6 intensity channels.
struct NNConfig {
  FeatureKind feature = FeatureKind::kMagphase;
  int order = 1;  // meaningful for magphase
  size_t n_filter = 256;
  size_t frames = 50;
  size_t bins = 512;

  size_t dim_in() const;
  // Throws std::invalid_argument unless order is 1..4 (for magphase),
  // n_filter is one of {32, 64, 128, 256, 512, 1024}, and frames/bins are
  // positive with bins divisible by 256 pooling-wise (8*8*4).
  void validate() const;
};

struct LayerStack {
  Shape input_shape;
  std::vector<std::unique_ptr<Layer>> layers;

  Shape output_shape() const;
  // (layer name, output shape) per layer, derived by folding output_shape
  // through the stack.
  std::vector<std::pair<std::string, Shape>> shape_table() const;
  Tensor forward(const Tensor& in) const;
};

// Arithmetic shape table of the full architecture for cfg, without
// allocating parameters. First row is ("input", input shape).
std::vector<std::pair<std::string, Shape>> plan_crnn(const NNConfig& cfg);

// Builds the full stack with seeded parameters (layer k draws from
// Rng(mix_seed(seed, k))). Throws std::invalid_argument on invalid cfg.
LayerStack build_crnn(const NNConfig& cfg, uint64_t seed);

// Runs the stack on a feature tensor; throws std::invalid_argument if its
// shape does not match the stack input.
Tensor forward(const LayerStack& stack, const FeatureTensor& input);

struct MseResult {
  double loss = 0.0;
  Tensor grad;  // dloss/dpred, same shape as pred
};

// Mean squared error between per-frame predictions (frames, 3) and the
// target direction broadcast over frames. pred == target gives 0; the
// antipodal prediction gives 4/3.
MseResult mse_loss(const Tensor& pred, const Direction& target);

// Central-difference check of a layer's analytic gradients at `point`.
// A random linear functional of the output serves as the scalar objective;
// up to 64 input coordinates and 64 parameter coordinates are probed (all
// of them when fewer exist). Returns the worst relative error
// |a - n| / max(1e-8, |a| + |n|).
double grad_check(Layer& layer, const Tensor& point, double eps = 1e-5,
                  uint64_t seed = 0);

// Reduced trainable head: frequency-average pooling, dense elu, dense
// linear to 3, unit normalization. Only the two dense layers carry
// parameters.
struct ToyHead {
  size_t frames = 0;
  size_t bins = 0;
  size_t channels = 0;
  size_t hidden = 0;
  LayerStack stack;

  Tensor forward(const FeatureTensor& input) const;
  // Frame outputs averaged per axis, then renormalized.
  Direction predict(const FeatureTensor& input) const;
};

ToyHead make_toy_head(size_t frames, size_t bins, size_t channels,
                      size_t hidden, uint64_t seed);

struct ToyTrainConfig {
  size_t hidden = 32;
  size_t epochs = 50;
  size_t batch = 16;
  double learning_rate = 0.01;
  uint64_t seed = 0;
  // Adam moments with bias correction.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ToyTrainResult {
  ToyHead head;
  std::vector<double> loss_trace;  // mean pre-update loss per epoch
  bool diverged = false;
};

// Mini-batch training of the reduced head with the adaptive moment
// optimizer. Deterministic per seed; a NaN loss stops training and sets
// diverged. Throws std::invalid_argument on empty or mismatched data.
ToyTrainResult train_toy_head(const std::vector<FeatureTensor>& features,
                              const std::vector<Direction>& labels,
                              const ToyTrainConfig& cfg);

// Parameter bundle: one tensor file per dense layer plus a JSON index.
// Tensor files quantize to 32-bit floats.
void save_toy_head(const ToyHead& head, const std::string& dir);
ToyHead load_toy_head(const std::string& dir);

}  // namespace hoadoa::nn

#endif  // HOADOA_NN_HPP_
