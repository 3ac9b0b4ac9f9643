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

#include "epoch_oracle/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/shape.hpp"

namespace epoch_oracle {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "none";
}

std::string_view to_string(Optimizer opt) {
  switch (opt) {
    case Optimizer::kNone: return "none";
    case Optimizer::kGradientDescent: return "gradient_descent";
    case Optimizer::kAdadelta: return "adadelta";
    case Optimizer::kAdagrad: return "adagrad";
    case Optimizer::kMomentum: return "momentum";
    case Optimizer::kAdam: return "adam";
    case Optimizer::kRmsProp: return "rmsprop";
  }
  return "none";
}

Activation parse_activation(std::string_view name) {
  for (Activation act : kAllActivations) {
    if (to_string(act) == name) return act;
  }
  fail(ErrorCode::kInvalidArgument, "unknown activation '" + std::string(name) + "'");
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "forward") return Optimizer::kNone;
  if (name == "sgd") return Optimizer::kGradientDescent;
  for (Optimizer opt : kAllOptimizers) {
    if (to_string(opt) == name) return opt;
  }
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

}  // namespace epoch_oracle

namespace epoch_oracle::kernels {
namespace {

std::size_t checked_output_dim(std::size_t size, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
  return static_cast<std::size_t>(output_dim(static_cast<std::int64_t>(size),
                                             static_cast<std::int64_t>(kernel),
                                             static_cast<std::int64_t>(stride),
                                             static_cast<std::int64_t>(padding)));
}

template <typename T>
void check_conv_shapes(const Tensor4<T>& input, const ConvParams<T>& params) {
  require(params.kernel >= 1 && params.stride >= 1, "conv2d: kernel and stride must be >= 1");
  require(input.channels == params.in_channels,
          "conv2d: input has " + std::to_string(input.channels) + " channels, kernel expects " +
              std::to_string(params.in_channels));
  require(params.weights.size() ==
              params.kernel * params.kernel * params.in_channels * params.out_channels,
          "conv2d: weight tensor size does not match K*K*C_in*C_out");
  require(!params.bias || params.bias->size() == params.out_channels,
          "conv2d: bias length must equal C_out");
  require(input.data.size() == input.batch * input.height * input.width * input.channels,
          "conv2d: input data length does not match its dims");
}

template <typename T>
void check_dense_shapes(const Matrix<T>& input, const DenseParams<T>& params) {
  require(input.cols == params.weights.rows,
          "dense: input width " + std::to_string(input.cols) + " != weight rows " +
              std::to_string(params.weights.rows));
  require(params.weights.data.size() == params.weights.rows * params.weights.cols,
          "dense: weight data length does not match its dims");
  require(input.data.size() == input.rows * input.cols,
          "dense: input data length does not match its dims");
  require(!params.bias || params.bias->size() == params.weights.cols,
          "dense: bias length must equal the output count");
}

}  // namespace

template <typename T>
void apply_activation(std::span<T> values, std::size_t row_length, Activation act) {
  switch (act) {
    case Activation::kNone:
      return;
    case Activation::kRelu:
      for (T& v : values) v = v > T(0) ? v : T(0);
      return;
    case Activation::kSigmoid:
      for (T& v : values) v = T(1) / (T(1) + std::exp(-v));
      return;
    case Activation::kTanh:
      for (T& v : values) v = std::tanh(v);
      return;
    case Activation::kSoftmax: {
      require(row_length >= 1 && values.size() % row_length == 0,
              "softmax: row length must divide the value count");
      for (std::size_t start = 0; start < values.size(); start += row_length) {
        auto row = values.subspan(start, row_length);
        const T peak = *std::max_element(row.begin(), row.end());
        T total = T(0);
        for (T& v : row) {
          v = std::exp(v - peak);
          total += v;
        }
        for (T& v : row) v /= total;
      }
      return;
    }
  }
}

template <typename T>
void activation_backward(std::span<const T> activated, std::span<T> grad, std::size_t row_length,
                         Activation act) {
  require(activated.size() == grad.size(), "activation_backward: size mismatch");
  switch (act) {
    case Activation::kNone:
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(activated[i] > T(0))) grad[i] = T(0);
      }
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= activated[i] * (T(1) - activated[i]);
      }
      return;
    case Activation::kTanh:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= T(1) - activated[i] * activated[i];
      }
      return;
    case Activation::kSoftmax: {
      require(row_length >= 1 && grad.size() % row_length == 0,
              "softmax: row length must divide the value count");
      for (std::size_t start = 0; start < grad.size(); start += row_length) {
        T dot = T(0);
        for (std::size_t i = start; i < start + row_length; ++i) dot += grad[i] * activated[i];
        for (std::size_t i = start; i < start + row_length; ++i) {
          grad[i] = activated[i] * (grad[i] - dot);
        }
      }
      return;
    }
  }
}

template <typename T>
Matrix<T> dense_forward(const Matrix<T>& input, const DenseParams<T>& params, Activation act) {
  check_dense_shapes(input, params);
  const std::size_t batch = input.rows;
  const std::size_t inputs = params.weights.rows;
  const std::size_t outputs = params.weights.cols;
  Matrix<T> out(batch, outputs);
  for (std::size_t b = 0; b < batch; ++b) {
    T* row = &out.data[b * outputs];
    const T* x = &input.data[b * inputs];
    for (std::size_t i = 0; i < inputs; ++i) {
      const T xv = x[i];
      const T* w = &params.weights.data[i * outputs];
      for (std::size_t o = 0; o < outputs; ++o) row[o] += xv * w[o];
    }
    if (params.bias) {
      const T* bias = params.bias->data();
      for (std::size_t o = 0; o < outputs; ++o) row[o] += bias[o];
    }
  }
  apply_activation(std::span<T>(out.data), outputs, act);
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Matrix<T>& input, const DenseParams<T>& params, Activation act,
                             const Matrix<T>& upstream) {
  check_dense_shapes(input, params);
  const std::size_t batch = input.rows;
  const std::size_t inputs = params.weights.rows;
  const std::size_t outputs = params.weights.cols;
  require(upstream.rows == batch && upstream.cols == outputs,
          "dense_backward: upstream gradient must be batch x outputs");

  Matrix<T> delta = upstream;
  if (act != Activation::kNone) {
    const Matrix<T> activated = dense_forward(input, params, act);
    activation_backward(std::span<const T>(activated.data), std::span<T>(delta.data), outputs,
                        act);
  }

  DenseGrads<T> grads{Matrix<T>(inputs, outputs), std::vector<T>(outputs, T(0)),
                      Matrix<T>(batch, inputs)};
  for (std::size_t b = 0; b < batch; ++b) {
    const T* d = &delta.data[b * outputs];
    const T* x = &input.data[b * inputs];
    for (std::size_t i = 0; i < inputs; ++i) {
      const T xv = x[i];
      T* gw = &grads.weights.data[i * outputs];
      for (std::size_t o = 0; o < outputs; ++o) gw[o] += xv * d[o];
    }
    for (std::size_t o = 0; o < outputs; ++o) grads.bias[o] += d[o];
    T* gx = &grads.input.data[b * inputs];
    for (std::size_t i = 0; i < inputs; ++i) {
      const T* w = &params.weights.data[i * outputs];
      T acc = T(0);
      for (std::size_t o = 0; o < outputs; ++o) acc += d[o] * w[o];
      gx[i] = acc;
    }
  }
  return grads;
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvParams<T>& params, Activation act) {
  check_conv_shapes(input, params);
  const std::size_t k = params.kernel;
  const std::size_t stride = params.stride;
  const std::size_t pad = params.padding;
  const std::size_t out_h = checked_output_dim(input.height, k, stride, pad);
  const std::size_t out_w = checked_output_dim(input.width, k, stride, pad);
  const std::size_t c_in = params.in_channels;
  const std::size_t c_out = params.out_channels;

  Tensor4<T> out(input.batch, out_h, out_w, c_out);
  for (std::size_t b = 0; b < input.batch; ++b) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        T* acc = &out.data[out.index(b, oy, ox, 0)];
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(input.height)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(input.width)) continue;
            const T* x = &input.data[input.index(b, static_cast<std::size_t>(iy),
                                                 static_cast<std::size_t>(ix), 0)];
            const T* w = &params.weights[params.weight_index(ky, kx, 0, 0)];
            for (std::size_t ci = 0; ci < c_in; ++ci) {
              const T xv = x[ci];
              const T* wrow = w + ci * c_out;
              for (std::size_t co = 0; co < c_out; ++co) acc[co] += xv * wrow[co];
            }
          }
        }
        if (params.bias) {
          for (std::size_t co = 0; co < c_out; ++co) acc[co] += (*params.bias)[co];
        }
      }
    }
  }
  apply_activation(std::span<T>(out.data), c_out, act);
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& input, const ConvParams<T>& params, Activation act,
                             const Tensor4<T>& upstream) {
  check_conv_shapes(input, params);
  const std::size_t k = params.kernel;
  const std::size_t stride = params.stride;
  const std::size_t pad = params.padding;
  const std::size_t out_h = checked_output_dim(input.height, k, stride, pad);
  const std::size_t out_w = checked_output_dim(input.width, k, stride, pad);
  const std::size_t c_in = params.in_channels;
  const std::size_t c_out = params.out_channels;
  require(upstream.batch == input.batch && upstream.height == out_h && upstream.width == out_w &&
              upstream.channels == c_out,
          "conv2d_backward: upstream gradient shape does not match the output shape");

  Tensor4<T> delta = upstream;
  if (act != Activation::kNone) {
    const Tensor4<T> activated = conv2d_forward(input, params, act);
    activation_backward(std::span<const T>(activated.data), std::span<T>(delta.data), c_out, act);
  }

  ConvGrads<T> grads{std::vector<T>(params.weights.size(), T(0)), std::vector<T>(c_out, T(0)),
                     Tensor4<T>(input.batch, input.height, input.width, c_in)};
  for (std::size_t b = 0; b < input.batch; ++b) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const T* d = &delta.data[delta.index(b, oy, ox, 0)];
        for (std::size_t co = 0; co < c_out; ++co) grads.bias[co] += d[co];
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(input.height)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(input.width)) continue;
            const std::size_t in_offset = input.index(b, static_cast<std::size_t>(iy),
                                                      static_cast<std::size_t>(ix), 0);
            const T* x = &input.data[in_offset];
            T* gx = &grads.input.data[in_offset];
            const std::size_t w_offset = params.weight_index(ky, kx, 0, 0);
            for (std::size_t ci = 0; ci < c_in; ++ci) {
              const T xv = x[ci];
              const T* w = &params.weights[w_offset + ci * c_out];
              T* gw = &grads.weights[w_offset + ci * c_out];
              T acc = T(0);
              for (std::size_t co = 0; co < c_out; ++co) {
                gw[co] += xv * d[co];
                acc += w[co] * d[co];
              }
              gx[ci] += acc;
            }
          }
        }
      }
    }
  }
  return grads;
}

template <typename T>
Tensor4<T> maxpool_forward(const Tensor4<T>& input, std::size_t kernel, std::size_t stride,
                           std::size_t padding) {
  require(kernel >= 1 && stride >= 1, "maxpool: kernel and stride must be >= 1");
  require(padding < kernel, "maxpool: padding must be smaller than the kernel");
  const std::size_t out_h = checked_output_dim(input.height, kernel, stride, padding);
  const std::size_t out_w = checked_output_dim(input.width, kernel, stride, padding);
  const std::size_t channels = input.channels;

  Tensor4<T> out(input.batch, out_h, out_w, channels, -std::numeric_limits<T>::infinity());
  for (std::size_t b = 0; b < input.batch; ++b) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        T* best = &out.data[out.index(b, oy, ox, 0)];
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(input.height)) continue;
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(input.width)) continue;
            const T* x = &input.data[input.index(b, static_cast<std::size_t>(iy),
                                                 static_cast<std::size_t>(ix), 0)];
            for (std::size_t c = 0; c < channels; ++c) best[c] = std::max(best[c], x[c]);
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& input, std::size_t kernel, std::size_t stride,
                            std::size_t padding, const Tensor4<T>& upstream) {
  const Tensor4<T> pooled = maxpool_forward(input, kernel, stride, padding);
  require(upstream.batch == pooled.batch && upstream.height == pooled.height &&
              upstream.width == pooled.width && upstream.channels == pooled.channels,
          "maxpool_backward: upstream gradient shape does not match the output shape");
  Tensor4<T> grad(input.batch, input.height, input.width, input.channels);
  for (std::size_t b = 0; b < input.batch; ++b) {
    for (std::size_t oy = 0; oy < pooled.height; ++oy) {
      for (std::size_t ox = 0; ox < pooled.width; ++ox) {
        for (std::size_t c = 0; c < input.channels; ++c) {
          const T target = pooled.at(b, oy, ox, c);
          bool routed = false;
          for (std::size_t ky = 0; ky < kernel && !routed; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                      static_cast<std::ptrdiff_t>(padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(input.height)) continue;
            for (std::size_t kx = 0; kx < kernel; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                        static_cast<std::ptrdiff_t>(padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(input.width)) continue;
              const auto y = static_cast<std::size_t>(iy);
              const auto x = static_cast<std::size_t>(ix);
              if (input.at(b, y, x, c) == target) {
                grad.at(b, y, x, c) += upstream.at(b, oy, ox, c);
                routed = true;
                break;
              }
            }
          }
        }
      }
    }
  }
  return grad;
}

template <typename T>
void optimizer_step(Optimizer kind, std::span<T> params, std::span<const T> grads,
                    OptimizerState<T>& state, std::int64_t step, T learning_rate,
                    const OptimizerConstants& constants) {
  require(kind != Optimizer::kNone, "optimizer_step: no optimizer selected (forward-only)");
  require(params.size() == grads.size(), "optimizer_step: params and grads differ in size");
  require(step >= 1, "optimizer_step: step index is 1-based");
  const std::size_t n = params.size();
  auto ensure = [n](std::vector<T>& slot) {
    if (slot.empty()) slot.assign(n, T(0));
    require(slot.size() == n, "optimizer_step: optimizer state does not match the parameters");
  };
  const T lr = learning_rate;

  switch (kind) {
    case Optimizer::kNone:
      break;
    case Optimizer::kGradientDescent:
      for (std::size_t i = 0; i < n; ++i) params[i] -= lr * grads[i];
      break;
    case Optimizer::kMomentum: {
      ensure(state.first);
      const T mu = static_cast<T>(constants.momentum);
      for (std::size_t i = 0; i < n; ++i) {
        state.first[i] = mu * state.first[i] + grads[i];
        params[i] -= lr * state.first[i];
      }
      break;
    }
    case Optimizer::kAdagrad: {
      ensure(state.first);
      const T eps = static_cast<T>(constants.adagrad_epsilon);
      for (std::size_t i = 0; i < n; ++i) {
        state.first[i] += grads[i] * grads[i];
        params[i] -= lr * grads[i] / (std::sqrt(state.first[i]) + eps);
      }
      break;
    }
    case Optimizer::kAdadelta: {
      ensure(state.first);
      ensure(state.second);
      const T rho = static_cast<T>(constants.adadelta_rho);
      const T eps = static_cast<T>(constants.adadelta_epsilon);
      for (std::size_t i = 0; i < n; ++i) {
        state.first[i] = rho * state.first[i] + (T(1) - rho) * grads[i] * grads[i];
        const T update =
            std::sqrt(state.second[i] + eps) / std::sqrt(state.first[i] + eps) * grads[i];
        state.second[i] = rho * state.second[i] + (T(1) - rho) * update * update;
        params[i] -= lr * update;
      }
      break;
    }
    case Optimizer::kRmsProp: {
      ensure(state.first);
      const T decay = static_cast<T>(constants.rmsprop_decay);
      const T eps = static_cast<T>(constants.rmsprop_epsilon);
      for (std::size_t i = 0; i < n; ++i) {
        state.first[i] = decay * state.first[i] + (T(1) - decay) * grads[i] * grads[i];
        params[i] -= lr * grads[i] / std::sqrt(state.first[i] + eps);
      }
      break;
    }
    case Optimizer::kAdam: {
      ensure(state.first);
      ensure(state.second);
      const double b1 = constants.adam_beta1;
      const double b2 = constants.adam_beta2;
      const T correction1 = static_cast<T>(1.0 - std::pow(b1, static_cast<double>(step)));
      const T correction2 = static_cast<T>(1.0 - std::pow(b2, static_cast<double>(step)));
      const T eps = static_cast<T>(constants.adam_epsilon);
      const T tb1 = static_cast<T>(b1);
      const T tb2 = static_cast<T>(b2);
      for (std::size_t i = 0; i < n; ++i) {
        state.first[i] = tb1 * state.first[i] + (T(1) - tb1) * grads[i];
        state.second[i] = tb2 * state.second[i] + (T(1) - tb2) * grads[i] * grads[i];
        const T m_hat = state.first[i] / correction1;
        const T v_hat = state.second[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
      break;
    }
  }
}

#define EPOCH_ORACLE_INSTANTIATE_KERNELS(T)                                                    \
  template void apply_activation<T>(std::span<T>, std::size_t, Activation);                   \
  template void activation_backward<T>(std::span<const T>, std::span<T>, std::size_t,         \
                                       Activation);                                           \
  template Matrix<T> dense_forward<T>(const Matrix<T>&, const DenseParams<T>&, Activation);   \
  template DenseGrads<T> dense_backward<T>(const Matrix<T>&, const DenseParams<T>&,           \
                                           Activation, const Matrix<T>&);                     \
  template Tensor4<T> conv2d_forward<T>(const Tensor4<T>&, const ConvParams<T>&, Activation); \
  template ConvGrads<T> conv2d_backward<T>(const Tensor4<T>&, const ConvParams<T>&,           \
                                           Activation, const Tensor4<T>&);                    \
  template Tensor4<T> maxpool_forward<T>(const Tensor4<T>&, std::size_t, std::size_t,         \
                                         std::size_t);                                        \
  template Tensor4<T> maxpool_backward<T>(const Tensor4<T>&, std::size_t, std::size_t,        \
                                          std::size_t, const Tensor4<T>&);                    \
  template void optimizer_step<T>(Optimizer, std::span<T>, std::span<const T>,                \
                                  OptimizerState<T>&, std::int64_t, T,                        \
                                  const OptimizerConstants&);

EPOCH_ORACLE_INSTANTIATE_KERNELS(float)
EPOCH_ORACLE_INSTANTIATE_KERNELS(double)

#undef EPOCH_ORACLE_INSTANTIATE_KERNELS

}  // namespace epoch_oracle::kernels
