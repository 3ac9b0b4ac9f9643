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

#include "epoch_oracle/features.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <sstream>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/shape.hpp"

namespace epoch_oracle {
namespace {

constexpr int kGroupKind = 0;
constexpr int kGroupActivation = 1;
constexpr int kGroupOptimizer = 2;
constexpr int kGroupConnectivity = 3;

constexpr std::array<FeatureSlot, 47> kSlots{{
    {"kind_dense", SlotKind::kOneHot, kGroupKind},
    {"kind_conv2d", SlotKind::kOneHot, kGroupKind},
    {"kind_pool", SlotKind::kOneHot, kGroupKind},
    {"kind_recurrent", SlotKind::kOneHot, kGroupKind},
    {"batch", SlotKind::kLog, -1},
    {"act_none", SlotKind::kOneHot, kGroupActivation},
    {"act_relu", SlotKind::kOneHot, kGroupActivation},
    {"act_softmax", SlotKind::kOneHot, kGroupActivation},
    {"act_sigmoid", SlotKind::kOneHot, kGroupActivation},
    {"act_tanh", SlotKind::kOneHot, kGroupActivation},
    {"opt_none", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_gradient_descent", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_adadelta", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_adagrad", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_momentum", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_adam", SlotKind::kOneHot, kGroupOptimizer},
    {"opt_rmsprop", SlotKind::kOneHot, kGroupOptimizer},
    {"dense_inputs", SlotKind::kLog, -1},
    {"dense_outputs", SlotKind::kLog, -1},
    {"conv_matrix_size", SlotKind::kLog, -1},
    {"conv_kernel", SlotKind::kLog, -1},
    {"conv_in_channels", SlotKind::kLog, -1},
    {"conv_out_channels", SlotKind::kLog, -1},
    {"conv_stride", SlotKind::kLog, -1},
    {"conv_padding", SlotKind::kLog, -1},
    {"conv_bias", SlotKind::kFlag, -1},
    {"pool_matrix_size", SlotKind::kLog, -1},
    {"pool_channels", SlotKind::kLog, -1},
    {"pool_kernel", SlotKind::kLog, -1},
    {"pool_stride", SlotKind::kLog, -1},
    {"pool_padding", SlotKind::kLog, -1},
    {"rnn_inputs", SlotKind::kLog, -1},
    {"rnn_units", SlotKind::kLog, -1},
    {"rnn_default", SlotKind::kFlag, -1},
    {"rnn_lstm", SlotKind::kFlag, -1},
    {"rnn_gru", SlotKind::kFlag, -1},
    {"rnn_bidirectional", SlotKind::kFlag, -1},
    {"flops", SlotKind::kLog, -1},
    {"hw_cores", SlotKind::kLinear, -1},
    {"hw_clock_mhz", SlotKind::kLinear, -1},
    {"hw_memory_gb", SlotKind::kLinear, -1},
    {"hw_bandwidth_gbps", SlotKind::kLinear, -1},
    {"hw_peak_gflops", SlotKind::kLinear, -1},
    {"conn_pcie3x16", SlotKind::kOneHot, kGroupConnectivity},
    {"conn_pcie3x4", SlotKind::kOneHot, kGroupConnectivity},
    {"conn_nvlink", SlotKind::kOneHot, kGroupConnectivity},
    {"conn_host", SlotKind::kOneHot, kGroupConnectivity},
}};
constexpr int kGroupCount = 4;

constexpr std::size_t kKindBase = 0;
constexpr std::size_t kBatch = 4;
constexpr std::size_t kActivationBase = 5;
constexpr std::size_t kOptimizerBase = 10;
constexpr std::size_t kDenseBase = 17;
constexpr std::size_t kConvBase = 19;
constexpr std::size_t kPoolBase = 26;
constexpr std::size_t kRnnBase = 31;
constexpr std::size_t kFlops = 37;
constexpr std::size_t kHardwareBase = 38;
constexpr std::size_t kConnectivityBase = 43;

std::size_t ordinal(Activation a) { return static_cast<std::size_t>(a); }
std::size_t ordinal(Optimizer o) { return static_cast<std::size_t>(o); }
std::size_t ordinal(Connectivity c) { return static_cast<std::size_t>(c); }

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    fail(ErrorCode::kInvalidArgument, "FLOP count overflows 64 bits");
  }
  return out;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& choices) {
  std::uniform_int_distribution<std::size_t> dist(0, choices.size() - 1);
  return choices[dist(rng)];
}

std::int64_t draw(std::mt19937_64& rng, IntRange range) {
  return std::uniform_int_distribution<std::int64_t>(range.lo, range.hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void require_range(const IntRange& r, std::int64_t min_lo, const char* what) {
  require(r.lo >= min_lo && r.lo <= r.hi,
          std::string("space spec: range '") + what + "' is empty or below its minimum");
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kPool: return "pool";
    case LayerKind::kRecurrent: return "recurrent";
  }
  return "dense";
}

LayerKind parse_layer_kind(std::string_view text) {
  if (text == "conv") return LayerKind::kConv2d;
  if (text == "maxpool") return LayerKind::kPool;
  for (LayerKind kind : kAllLayerKinds) {
    if (to_string(kind) == text) return kind;
  }
  fail(ErrorCode::kInvalidArgument, "unknown layer kind '" + std::string(text) + "'");
}

std::string_view to_string(RecurrenceType type) {
  switch (type) {
    case RecurrenceType::kDefault: return "default";
    case RecurrenceType::kLstm: return "lstm";
    case RecurrenceType::kGru: return "gru";
  }
  return "default";
}

void validate(const LayerConfig& config) {
  require(config.batch_size >= 1, "layer config: batch size must be >= 1");
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DenseShape>) {
          require(s.inputs >= 1 && s.outputs >= 1, "dense config: inputs and outputs must be >= 1");
        } else if constexpr (std::is_same_v<S, ConvShape>) {
          require(s.matrix_size >= 1 && s.kernel >= 1 && s.in_channels >= 1 &&
                      s.out_channels >= 1 && s.stride >= 1 && s.padding >= 0,
                  "conv config: dims must be >= 1 and padding >= 0");
          output_dim(s.matrix_size, s.kernel, s.stride, s.padding);
        } else if constexpr (std::is_same_v<S, PoolShape>) {
          require(s.matrix_size >= 1 && s.channels >= 1 && s.kernel >= 1 && s.stride >= 1 &&
                      s.padding >= 0,
                  "pool config: dims must be >= 1 and padding >= 0");
          require(s.padding < s.kernel, "pool config: padding must be smaller than the kernel");
          output_dim(s.matrix_size, s.kernel, s.stride, s.padding);
        } else {
          require(s.inputs >= 1 && s.units >= 1, "recurrent config: inputs and units must be >= 1");
        }
      },
      config.shape);
}

std::string canonical_string(const LayerConfig& config) {
  std::ostringstream out;
  out << to_string(config.kind()) << "|b=" << config.batch_size
      << "|act=" << to_string(config.activation) << "|opt=" << to_string(config.optimizer);
  std::visit(
      [&out](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DenseShape>) {
          out << "|in=" << s.inputs << "|out=" << s.outputs;
        } else if constexpr (std::is_same_v<S, ConvShape>) {
          out << "|h=" << s.matrix_size << "|k=" << s.kernel << "|cin=" << s.in_channels
              << "|cout=" << s.out_channels << "|s=" << s.stride << "|p=" << s.padding
              << "|bias=" << (s.has_bias ? 1 : 0);
        } else if constexpr (std::is_same_v<S, PoolShape>) {
          out << "|h=" << s.matrix_size << "|c=" << s.channels << "|k=" << s.kernel
              << "|s=" << s.stride << "|p=" << s.padding;
        } else {
          out << "|in=" << s.inputs << "|units=" << s.units << "|type=" << to_string(s.type)
              << "|bi=" << (s.bidirectional ? 1 : 0);
        }
      },
      config.shape);
  return out.str();
}

std::uint64_t config_hash(const LayerConfig& config, const HardwareProfile& hw) {
  const std::string text = canonical_string(config) + "|hw=" + hw.name;
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::int64_t flops_dense(std::int64_t batch, std::int64_t inputs, std::int64_t outputs,
                         bool has_bias) {
  require(batch >= 1 && inputs >= 1 && outputs >= 1, "flops_dense: dims must be >= 1");
  const std::int64_t elements = checked_mul(batch, outputs);
  const std::int64_t per_output = 2 * inputs - 1 + (has_bias ? 1 : 0);
  return checked_mul(elements, per_output);
}

std::int64_t flops_conv(std::int64_t batch, std::int64_t matrix_size, std::int64_t kernel,
                        std::int64_t in_channels, std::int64_t out_channels, std::int64_t stride,
                        std::int64_t padding, bool has_bias) {
  require(batch >= 1 && in_channels >= 1 && out_channels >= 1,
          "flops_conv: batch and channel counts must be >= 1");
  const std::int64_t out = output_dim(matrix_size, kernel, stride, padding);
  const std::int64_t elements = checked_mul(checked_mul(batch, out * out), out_channels);
  const std::int64_t per_output =
      checked_mul(2 * kernel * kernel, in_channels) - 1 + (has_bias ? 1 : 0);
  return checked_mul(elements, per_output);
}

std::int64_t flops_pool(std::int64_t batch, std::int64_t matrix_size, std::int64_t channels,
                        std::int64_t kernel, std::int64_t stride, std::int64_t padding) {
  require(batch >= 1 && channels >= 1, "flops_pool: batch and channels must be >= 1");
  const std::int64_t out = output_dim(matrix_size, kernel, stride, padding);
  const std::int64_t elements = checked_mul(checked_mul(batch, out * out), channels);
  return checked_mul(elements, kernel * kernel - 1);
}

std::int64_t layer_flops(const LayerConfig& config) {
  const std::int64_t b = config.batch_size;
  return std::visit(
      [b](const auto& s) -> std::int64_t {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DenseShape>) {
          return flops_dense(b, s.inputs, s.outputs, true);
        } else if constexpr (std::is_same_v<S, ConvShape>) {
          return flops_conv(b, s.matrix_size, s.kernel, s.in_channels, s.out_channels, s.stride,
                            s.padding, s.has_bias);
        } else if constexpr (std::is_same_v<S, PoolShape>) {
          return flops_pool(b, s.matrix_size, s.channels, s.kernel, s.stride, s.padding);
        } else {
          const std::int64_t gates = s.type == RecurrenceType::kLstm  ? 4
                                     : s.type == RecurrenceType::kGru ? 3
                                                                      : 1;
          const std::int64_t one = flops_dense(b, s.inputs + s.units, s.units, true);
          return checked_mul(checked_mul(one, gates), s.bidirectional ? 2 : 1);
        }
      },
      config.shape);
}

std::span<const FeatureSlot> feature_slots() { return kSlots; }

std::size_t feature_count() { return kSlots.size(); }

std::size_t feature_index(std::string_view slot_name) {
  for (std::size_t i = 0; i < kSlots.size(); ++i) {
    if (kSlots[i].name == slot_name) return i;
  }
  fail(ErrorCode::kInvalidArgument, "unknown feature slot '" + std::string(slot_name) + "'");
}

FeatureVector encode(const LayerConfig& config, const HardwareProfile& hw) {
  validate(config);
  validate(hw);
  FeatureVector fv{std::vector<double>(kSlots.size(), 0.0), std::string(kFeatureSchemaId), false};
  auto& v = fv.values;
  auto real = [](std::int64_t x) { return static_cast<double>(x); };

  v[kKindBase + static_cast<std::size_t>(config.kind())] = 1.0;
  v[kBatch] = real(config.batch_size);
  v[kActivationBase + ordinal(config.activation)] = 1.0;
  v[kOptimizerBase + ordinal(config.optimizer)] = 1.0;

  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DenseShape>) {
          v[kDenseBase + 0] = real(s.inputs);
          v[kDenseBase + 1] = real(s.outputs);
        } else if constexpr (std::is_same_v<S, ConvShape>) {
          v[kConvBase + 0] = real(s.matrix_size);
          v[kConvBase + 1] = real(s.kernel);
          v[kConvBase + 2] = real(s.in_channels);
          v[kConvBase + 3] = real(s.out_channels);
          v[kConvBase + 4] = real(s.stride);
          v[kConvBase + 5] = real(s.padding);
          v[kConvBase + 6] = s.has_bias ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<S, PoolShape>) {
          v[kPoolBase + 0] = real(s.matrix_size);
          v[kPoolBase + 1] = real(s.channels);
          v[kPoolBase + 2] = real(s.kernel);
          v[kPoolBase + 3] = real(s.stride);
          v[kPoolBase + 4] = real(s.padding);
        } else {
          v[kRnnBase + 0] = real(s.inputs);
          v[kRnnBase + 1] = real(s.units);
          v[kRnnBase + 2 + static_cast<std::size_t>(s.type)] = 1.0;
          v[kRnnBase + 5] = s.bidirectional ? 1.0 : 0.0;
        }
      },
      config.shape);

  v[kFlops] = real(layer_flops(config));
  v[kHardwareBase + 0] = real(hw.core_count);
  v[kHardwareBase + 1] = hw.clock_mhz;
  v[kHardwareBase + 2] = hw.memory_gb;
  v[kHardwareBase + 3] = hw.bandwidth_gbps;
  v[kHardwareBase + 4] = hw.peak_gflops;
  v[kConnectivityBase + ordinal(hw.connectivity)] = 1.0;
  return fv;
}

void check_feature_vector(const FeatureVector& features) {
  require(features.values.size() == kSlots.size(),
          "feature vector has " + std::to_string(features.values.size()) + " slots, schema has " +
              std::to_string(kSlots.size()));
  std::array<double, kGroupCount> sums{};
  for (std::size_t i = 0; i < kSlots.size(); ++i) {
    if (kSlots[i].group >= 0) sums[static_cast<std::size_t>(kSlots[i].group)] += features.values[i];
  }
  for (double s : sums) require(s == 1.0, "feature vector: a one-hot group does not sum to 1");
}

void SpaceSpec::validate() const {
  require(!kinds.empty(), "space spec: no layer kinds to sample");
  for (LayerKind k : kinds) {
    require(k != LayerKind::kRecurrent, "space spec: recurrent layers have no benchmark kernel");
  }
  require_range(batch, 1, "batch");
  require_range(dense_dim, 1, "dense_dim");
  require_range(matrix_size, 1, "matrix_size");
  require_range(kernel, 1, "kernel");
  require_range(stride, 1, "stride");
  require_range(padding, 0, "padding");
  require_range(pool_channels, 1, "pool_channels");
  require(channel_budget >= matrix_size.hi,
          "space spec: channel budget must allow at least one channel at the largest matrix");
  require(channel_cap >= 0, "space spec: channel cap must be >= 0");
  require(forward_only_probability >= 0.0 && forward_only_probability <= 1.0,
          "space spec: forward-only probability must lie in [0, 1]");
  require(!activations.empty(), "space spec: no activations to sample");
  require(forward_only_probability == 1.0 || !optimizers.empty(),
          "space spec: no optimizers to sample");
  for (Optimizer o : optimizers) {
    require(o != Optimizer::kNone, "space spec: forward-only runs come from the probability, "
                                   "not the optimizer list");
  }
  for (LayerKind k : kinds) {
    if (k == LayerKind::kPool) {
      require(padding.lo < kernel.hi, "space spec: pool padding must be able to stay below the kernel");
    }
  }
  // Every kind must be able to produce a fitting window.
  require(matrix_size.hi + 2 * padding.hi >= kernel.lo,
          "space spec: no kernel fits any matrix size");
}

SpaceSpec SpaceSpec::desk_scale() {
  SpaceSpec spec;
  spec.dense_dim = {1, 512};
  spec.matrix_size = {1, 64};
  spec.channel_cap = 32;
  spec.pool_channels = {1, 32};
  return spec;
}

std::vector<LayerConfig> sample_space(const SpaceSpec& spec, std::int64_t count,
                                      std::uint64_t seed) {
  require(count >= 0, "sample_space: count must be >= 0");
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<LayerConfig> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t n = 0; n < count; ++n) {
    LayerConfig config;
    const LayerKind kind = pick(rng, spec.kinds);
    config.batch_size = draw(rng, spec.batch);
    config.activation = pick(rng, spec.activations);
    config.optimizer =
        coin(rng, spec.forward_only_probability) ? Optimizer::kNone : pick(rng, spec.optimizers);

    switch (kind) {
      case LayerKind::kDense:
        config.shape = DenseShape{draw(rng, spec.dense_dim), draw(rng, spec.dense_dim)};
        break;
      case LayerKind::kConv2d: {
        ConvShape s;
        do {
          s.matrix_size = draw(rng, spec.matrix_size);
          s.kernel = draw(rng, spec.kernel);
          s.stride = draw(rng, spec.stride);
          s.padding = draw(rng, spec.padding);
        } while (s.matrix_size + 2 * s.padding < s.kernel);
        std::int64_t max_channels = std::max<std::int64_t>(1, spec.channel_budget / s.matrix_size);
        if (spec.channel_cap > 0) max_channels = std::min(max_channels, spec.channel_cap);
        s.in_channels = draw(rng, {1, max_channels});
        s.out_channels = draw(rng, {1, max_channels});
        s.has_bias = coin(rng, 0.5);
        config.shape = s;
        break;
      }
      case LayerKind::kPool: {
        PoolShape s;
        do {
          s.matrix_size = draw(rng, spec.matrix_size);
          s.kernel = draw(rng, spec.kernel);
          s.stride = draw(rng, spec.stride);
          s.padding = draw(rng, spec.padding);
        } while (s.padding >= s.kernel || s.matrix_size + 2 * s.padding < s.kernel);
        s.channels = draw(rng, spec.pool_channels);
        config.activation = Activation::kNone;
        config.shape = s;
        break;
      }
      case LayerKind::kRecurrent:
        break;  // rejected by validate()
    }
    out.push_back(std::move(config));
  }
  return out;
}

std::uint64_t dense_space_cardinality(const SpaceSpec& spec) {
  const auto width = [](IntRange r) { return static_cast<std::uint64_t>(r.hi - r.lo + 1); };
  return width(spec.batch) * width(spec.dense_dim) * width(spec.dense_dim);
}

}  // namespace epoch_oracle
