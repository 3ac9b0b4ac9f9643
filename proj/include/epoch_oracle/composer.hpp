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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "epoch_oracle/bench.hpp"
#include "epoch_oracle/features.hpp"
#include "epoch_oracle/predictor.hpp"

namespace epoch_oracle {

struct NetworkLayer {
  /// Shape with input dims resolved from the previous layer.
  LayerShape shape;
  Activation activation = Activation::kNone;
  std::size_t line = 0;

  LayerKind kind() const;
};

struct NetworkDescription {
  std::string name;
  std::int64_t input_size = 0;  // square H = W
  std::int64_t input_channels = 0;
  std::int64_t batch_size = 1;
  Optimizer mode = Optimizer::kNone;  // kNone is forward only
  std::vector<NetworkLayer> layers;

  std::size_t layer_count() const { return layers.size(); }
};

/// Line-oriented format, '#' starts a comment:
///   network <name>
///   input <H> <W> <C>          (square inputs only)
///   batch <B>
///   mode <forward|sgd|adam|...>
///   conv k=<K> s=<S> p=<int|same> out=<C> [act=<a>] [bias=<0|1>] [in=<C>]
///   maxpool k=<K> s=<S> [p=<P>]
///   dense out=<O> [act=<a>] [in=<I>]
/// A dense layer after a spatial layer flattens it. Throws kParseError naming
/// the line for bad syntax and kInvalidArgument naming the layer index when
/// shapes do not chain.
NetworkDescription parse_network(std::istream& in, std::string_view source_name = "<stream>");
NetworkDescription parse_network(const std::filesystem::path& path);

/// The atomic operation for layer `index` at the given batch size and mode.
LayerConfig layer_config(const NetworkDescription& desc, std::size_t index,
                         std::int64_t batch_size, Optimizer mode);

/// Per-layer time source for composition; lets tests plug in stubs.
class LayerTimeModel {
 public:
  virtual ~LayerTimeModel() = default;
  virtual bool supports(LayerKind kind) const = 0;
  virtual double predict_ms(const LayerConfig& config, const HardwareProfile& hw) const = 0;
};

/// Supports exactly the layer kinds present in the predictor's training data.
class MlpTimeModel final : public LayerTimeModel {
 public:
  explicit MlpTimeModel(const MlpPredictor& predictor) : predictor_(predictor) {}
  bool supports(LayerKind kind) const override { return predictor_.models(kind); }
  double predict_ms(const LayerConfig& config, const HardwareProfile& hw) const override {
    return predict_time_ms(predictor_, config, hw);
  }

 private:
  const MlpPredictor& predictor_;
};

struct LayerTime {
  std::size_t index = 0;
  LayerConfig config;
  double time_ms = 0;
  bool unmodeled = false;  // no model for this kind; time_ms is 0
};

struct PredictionReport {
  std::string network;
  std::string hw_name;
  Optimizer mode = Optimizer::kNone;
  std::int64_t batch_size = 1;
  std::vector<LayerTime> layers;
  double batch_time_ms = 0;  // exact sum of the per-layer times
  std::int64_t batches = 1;
  double epoch_time_ms = 0;  // batches * batch_time_ms
};

struct ComposeOptions {
  /// Predict unsupported kinds as 0 with the unmodeled flag instead of failing.
  bool allow_unmodeled = false;
};

/// Uses desc.batch_size and desc.mode. Throws kUnsupportedLayer naming the
/// kind when the model lacks a layer kind and allow_unmodeled is off.
PredictionReport predict_network(const NetworkDescription& desc, const LayerTimeModel& model,
                                 const HardwareProfile& hw, std::int64_t batches,
                                 const ComposeOptions& options = {});

/// Times every layer on the host with run_benchmark and aggregates the medians.
PredictionReport measure_network(const NetworkDescription& desc, const HardwareProfile& hw,
                                 Clock& clock, std::int64_t batches,
                                 const BenchOptions& options = {});

struct ModeRow {
  std::size_t layer_index = 0;
  LayerKind kind = LayerKind::kDense;
  std::int64_t batch_size = 1;
  double forward_ms = 0;
  double sgd_ms = 0;
  double adam_ms = 0;
  bool unmodeled = false;
};

/// Per-layer predictions in forward, SGD and Adam mode for each batch size,
/// ordered by batch size then layer.
std::vector<ModeRow> compare_modes(const NetworkDescription& desc, const LayerTimeModel& model,
                                   const HardwareProfile& hw,
                                   const std::vector<std::int64_t>& batch_sizes = {1, 2, 4, 8, 16,
                                                                                   32, 64},
                                   const ComposeOptions& options = {});

/// CSV with columns layer_index,kind,mode,batch,predicted_ms[,measured_ms]
/// and a final row with layer_index "total". `measured` must describe the
/// same network.
void write_report_csv(std::ostream& out, const PredictionReport& predicted,
                      const PredictionReport* measured = nullptr);

void write_modes_csv(std::ostream& out, const std::vector<ModeRow>& rows);

}  // namespace epoch_oracle
