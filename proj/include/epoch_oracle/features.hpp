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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "epoch_oracle/hardware.hpp"
#include "epoch_oracle/kernels.hpp"

namespace epoch_oracle {

enum class LayerKind { kDense, kConv2d, kPool, kRecurrent };
enum class RecurrenceType { kDefault, kLstm, kGru };

inline constexpr LayerKind kAllLayerKinds[] = {LayerKind::kDense, LayerKind::kConv2d,
                                               LayerKind::kPool, LayerKind::kRecurrent};

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);
std::string_view to_string(RecurrenceType type);

/// Fully connected layers always carry a bias.
struct DenseShape {
  std::int64_t inputs = 1;
  std::int64_t outputs = 1;
  bool operator==(const DenseShape&) const = default;
};

/// Square inputs only: matrix_size is both height and width.
struct ConvShape {
  std::int64_t matrix_size = 1;
  std::int64_t kernel = 1;
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  bool has_bias = true;
  bool operator==(const ConvShape&) const = default;
};

struct PoolShape {
  std::int64_t matrix_size = 1;
  std::int64_t channels = 1;
  std::int64_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  bool operator==(const PoolShape&) const = default;
};

struct RecurrentShape {
  std::int64_t inputs = 1;
  std::int64_t units = 1;
  RecurrenceType type = RecurrenceType::kDefault;
  bool bidirectional = false;
  bool operator==(const RecurrentShape&) const = default;
};

using LayerShape = std::variant<DenseShape, ConvShape, PoolShape, RecurrentShape>;

/// One atomic operation. optimizer == kNone means the operation is timed as a
/// forward pass only.
struct LayerConfig {
  std::int64_t batch_size = 1;
  Activation activation = Activation::kNone;
  Optimizer optimizer = Optimizer::kNone;
  LayerShape shape = DenseShape{};

  LayerKind kind() const { return static_cast<LayerKind>(shape.index()); }
  bool forward_only() const { return optimizer == Optimizer::kNone; }
  bool operator==(const LayerConfig&) const = default;
};

/// Throws kInvalidArgument naming the first violated constraint.
void validate(const LayerConfig& config);

/// Stable single-line rendering of every field; the basis of config hashing.
std::string canonical_string(const LayerConfig& config);

/// FNV-1a digest of the canonical config plus the hardware name.
std::uint64_t config_hash(const LayerConfig& config, const HardwareProfile& hw);

// ---------------------------------------------------------------------------
// FLOP analytics. Multiplies and adds are counted separately; a bias costs one
// add per output element.

std::int64_t flops_dense(std::int64_t batch, std::int64_t inputs, std::int64_t outputs,
                         bool has_bias);
std::int64_t flops_conv(std::int64_t batch, std::int64_t matrix_size, std::int64_t kernel,
                        std::int64_t in_channels, std::int64_t out_channels, std::int64_t stride,
                        std::int64_t padding, bool has_bias);
/// Comparisons: K*K - 1 per output element.
std::int64_t flops_pool(std::int64_t batch, std::int64_t matrix_size, std::int64_t channels,
                        std::int64_t kernel, std::int64_t stride, std::int64_t padding);
/// Forward FLOPs of the layer's own computation, dispatched on kind. A
/// recurrent layer is counted as one step of its gate matrices.
std::int64_t layer_flops(const LayerConfig& config);

// ---------------------------------------------------------------------------
// Feature encoding.

inline constexpr std::string_view kFeatureSchemaId = "layer-hw-features-v1";

enum class SlotKind {
  kOneHot,  // member of a categorical group; passed through unscaled
  kFlag,    // binary indicator; passed through unscaled
  kLinear,  // z-scored
  kLog,     // log1p, then z-scored
};

struct FeatureSlot {
  std::string_view name;
  SlotKind kind;
  int group;  // one-hot group id, -1 when not part of an always-present group
};

/// Layout: kind one-hot | batch | activation one-hot | optimizer one-hot |
/// kind-specific fields (0 when absent) | FLOPs | hardware numbers |
/// connectivity one-hot.
std::span<const FeatureSlot> feature_slots();
std::size_t feature_count();
std::size_t feature_index(std::string_view slot_name);

struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;
  bool scaled = false;
};

FeatureVector encode(const LayerConfig& config, const HardwareProfile& hw);

/// Throws kInvalidArgument if the vector has the wrong length or a one-hot
/// group does not sum to exactly one.
void check_feature_vector(const FeatureVector& features);

// ---------------------------------------------------------------------------
// Configuration space sampling.

struct IntRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  bool operator==(const IntRange&) const = default;
};

struct SpaceSpec {
  std::vector<LayerKind> kinds{LayerKind::kDense, LayerKind::kConv2d};
  IntRange batch{1, 64};
  IntRange dense_dim{1, 4096};
  IntRange matrix_size{1, 512};
  IntRange kernel{1, 7};
  IntRange stride{1, 4};
  IntRange padding{0, 3};
  IntRange pool_channels{1, 64};
  /// Conv channel counts are drawn from 1..floor(channel_budget / matrix_size).
  std::int64_t channel_budget = 10000;
  /// Optional extra cap on conv channel counts; 0 disables it.
  std::int64_t channel_cap = 0;
  std::vector<Activation> activations{Activation::kNone, Activation::kRelu, Activation::kSigmoid,
                                      Activation::kTanh};
  std::vector<Optimizer> optimizers{Optimizer::kGradientDescent, Optimizer::kAdadelta,
                                    Optimizer::kAdagrad,         Optimizer::kMomentum,
                                    Optimizer::kAdam,            Optimizer::kRmsProp};
  double forward_only_probability = 0.5;

  void validate() const;

  /// Ranges small enough to benchmark on a CPU: dense dims <= 512, matrix <= 64, channels <= 32.
  static SpaceSpec desk_scale();
};

/// Every field is drawn independently and uniformly; a conv draw whose window
/// does not fit (H + 2P < K) is rejected and redrawn as a whole. Deterministic
/// for a given seed.
std::vector<LayerConfig> sample_space(const SpaceSpec& spec, std::int64_t count,
                                      std::uint64_t seed);

/// Batch x inputs x outputs combinations of the dense space.
std::uint64_t dense_space_cardinality(const SpaceSpec& spec);

}  // namespace epoch_oracle
