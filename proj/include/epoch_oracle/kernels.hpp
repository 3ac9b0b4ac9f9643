// Copyright 2026 The epoch-oracle Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace epoch_oracle {

enum class Activation { kNone, kRelu, kSoftmax, kSigmoid, kTanh };

/// kNone marks a forward-only run (no backward pass, no weight update).
enum class Optimizer {
  kNone,
  kGradientDescent,
  kAdadelta,
  kAdagrad,
  kMomentum,
  kAdam,
  kRmsProp,
};

inline constexpr Activation kAllActivations[] = {
    Activation::kNone, Activation::kRelu, Activation::kSoftmax, Activation::kSigmoid,
    Activation::kTanh};
inline constexpr Optimizer kAllOptimizers[] = {
    Optimizer::kNone,     Optimizer::kGradientDescent, Optimizer::kAdadelta,
    Optimizer::kAdagrad,  Optimizer::kMomentum,        Optimizer::kAdam,
    Optimizer::kRmsProp};

std::string_view to_string(Activation act);
std::string_view to_string(Optimizer opt);
Activation parse_activation(std::string_view name);
Optimizer parse_optimizer(std::string_view name);

}  // namespace epoch_oracle

// Reference CPU kernels for the benchmarked layer operations. Everything is
// templated on the scalar so the timed benchmarks run in float while gradient
// checks run the same code in double. Data layout is row-major (B, H, W, C).
namespace epoch_oracle::kernels {

template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

template <typename T>
struct Tensor4 {
  std::size_t batch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(std::size_t b, std::size_t h, std::size_t w, std::size_t c, T fill = T(0))
      : batch(b), height(h), width(w), channels(c), data(b * h * w * c, fill) {}

  std::size_t index(std::size_t b, std::size_t y, std::size_t x, std::size_t c) const {
    return ((b * height + y) * width + x) * channels + c;
  }
  T& at(std::size_t b, std::size_t y, std::size_t x, std::size_t c) { return data[index(b, y, x, c)]; }
  const T& at(std::size_t b, std::size_t y, std::size_t x, std::size_t c) const {
    return data[index(b, y, x, c)];
  }
};

template <typename T>
struct DenseParams {
  Matrix<T> weights;  // inputs x outputs
  std::optional<std::vector<T>> bias;
};

template <typename T>
struct ConvParams {
  std::size_t kernel = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::vector<T> weights;  // (ky, kx, c_in, c_out), row-major
  std::optional<std::vector<T>> bias;

  std::size_t weight_index(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) const {
    return ((ky * kernel + kx) * in_channels + ci) * out_channels + co;
  }
};

template <typename T>
struct DenseGrads {
  Matrix<T> weights;
  std::vector<T> bias;  // always sized to outputs, whether or not the layer has a bias
  Matrix<T> input;
};

template <typename T>
struct ConvGrads {
  std::vector<T> weights;
  std::vector<T> bias;
  Tensor4<T> input;
};

/// Applies `act` in place. Softmax normalises each contiguous row of `row_length` values.
template <typename T>
void apply_activation(std::span<T> values, std::size_t row_length, Activation act);

/// Turns dL/d(activated) into dL/d(pre-activation) in place, given the activated values.
template <typename T>
void activation_backward(std::span<const T> activated, std::span<T> grad, std::size_t row_length,
                         Activation act);

template <typename T>
Matrix<T> dense_forward(const Matrix<T>& input, const DenseParams<T>& params, Activation act);

/// Gradients of sum(dense_forward(input) * upstream) with respect to the
/// weights, bias and input.
template <typename T>
DenseGrads<T> dense_backward(const Matrix<T>& input, const DenseParams<T>& params, Activation act,
                             const Matrix<T>& upstream);

/// Cross-correlation with zero padding. Each output accumulates over the
/// input channel innermost, then kernel x, then kernel y.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params, Activation act);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params, Activation act,
                             const Tensor4<T>& upstream);

/// Padded cells act as -infinity.
template <typename T>
Tensor4<T> maxpool_forward(const Tensor4<T>& input, std::size_t kernel, std::size_t stride,
                           std::size_t padding);

/// Routes each upstream gradient to the first maximal element of its window.
template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& input, std::size_t kernel, std::size_t stride,
                            std::size_t padding, const Tensor4<T>& upstream);

/// Per-tensor optimizer slots. Slots are sized lazily on the first step.
template <typename T>
struct OptimizerState {
  std::vector<T> first;
  std::vector<T> second;
};

struct OptimizerConstants {
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double adadelta_rho = 0.95;
  double adadelta_epsilon = 1e-8;
  double adagrad_epsilon = 1e-7;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-10;
};

/// One in-place update of `params`. `step` is the 1-based update count
/// (used by Adam's bias correction). Throws kInvalidArgument for Optimizer::kNone.
template <typename T>
void optimizer_step(Optimizer kind, std::span<T> params, std::span<const T> grads,
                    OptimizerState<T>& state, std::int64_t step, T learning_rate,
                    const OptimizerConstants& constants = {});

}  // namespace epoch_oracle::kernels
