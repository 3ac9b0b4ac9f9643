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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epoch_oracle/dataset.hpp"
#include "epoch_oracle/features.hpp"
#include "epoch_oracle/kernels.hpp"

namespace epoch_oracle {

inline constexpr std::string_view kModelFormat = "mlp-predictor v1";

struct MlpArchitecture {
  std::int64_t input_dim = 0;  // 0 means feature_count()
  std::vector<std::int64_t> hidden;  // j_1 .. j_m
  double dropout_rate = 0.2;
  double l2_lambda = 1e-5;

  std::int64_t depth() const { return static_cast<std::int64_t>(hidden.size()); }
  void validate() const;

  /// Halving pyramid topped at min(512, 32 * 2^(m-1)) and floored at 8:
  /// 256/128/64/32 for m=4, 512/256/128/64/32/16 for m=6.
  static MlpArchitecture pyramid(std::int64_t depth, std::int64_t input_dim = 0);

  bool operator==(const MlpArchitecture&) const = default;
};

struct MlpPredictor {
  MlpArchitecture arch;
  /// Hidden layers then the linear head; layers[k].weights is fan_in x fan_out.
  std::vector<kernels::DenseParams<double>> layers;
  Scaler scaler;
  std::string schema_id{kFeatureSchemaId};
  /// Layer kinds present in the training data.
  std::vector<LayerKind> modeled_kinds;

  bool models(LayerKind kind) const;
};

/// He initialisation: weights ~ N(0, 2/fan_in), biases 0. Identity scaler.
MlpPredictor init_predictor(const MlpArchitecture& arch, std::uint64_t seed);

struct ForwardMode {
  bool train = false;
  std::uint64_t dropout_seed = 0;

  static ForwardMode infer() { return {}; }
  static ForwardMode training(std::uint64_t seed) { return {true, seed}; }
};

/// Output in scaled log-time space. `x` must already be scaler-applied.
double forward(const MlpPredictor& p, const FeatureVector& x, ForwardMode mode = {});

/// Batched forward over rows of scaled features (rows x input_dim).
std::vector<double> forward_batch(const MlpPredictor& p, const kernels::Matrix<double>& x,
                                  ForwardMode mode = {});

/// encode -> scale -> forward -> expm1 of the unscaled output, clamped to >= 0
/// (the log-time is capped at 700 so the result stays finite).
/// Throws kVersionError if the model was built for another feature schema.
double predict_time_ms(const MlpPredictor& p, const LayerConfig& config,
                       const HardwareProfile& hw);

struct LossGradient {
  double loss = 0;
  /// Same shapes as MlpPredictor::layers; bias is always set.
  std::vector<kernels::DenseParams<double>> grads;
};

/// mean((f(x) - z)^2) + l2 * sum ||W||^2 and its gradient, over one batch of
/// scaled rows and scaled targets.
LossGradient batch_loss_gradient(const MlpPredictor& p, const kernels::Matrix<double>& x,
                                 std::span<const double> z, ForwardMode mode = {});

/// sqrt(mean((ln(1+pred) - ln(1+actual))^2)).
double loss_rmsle(std::span<const double> pred_ms, std::span<const double> actual_ms);
double loss_rmse(std::span<const double> pred_ms, std::span<const double> actual_ms);

struct TrainConfig {
  std::int64_t epochs = 300;
  std::int64_t batch_size = 128;
  double learning_rate = 0.1;
  std::int64_t decay_every = 40;
  double decay_factor = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// learning_rate / decay_factor^floor(epoch / decay_every), epoch 0-based.
  double learning_rate_at(std::int64_t epoch) const;
};

struct EpochLoss {
  std::int64_t epoch = 0;
  double learning_rate = 0;
  double train_loss = 0;  // mean objective over the epoch's batches
  double test_rmsle = 0;  // NaN when the test split is empty
};

struct TrainResult {
  MlpPredictor predictor;
  std::vector<EpochLoss> loss_curve;
};

/// Fits the scaler on splits.train, then trains with Adam on the scaled
/// log1p targets. arch.input_dim 0 means the feature count. Deterministic per
/// cfg.seed. Throws kInvalidArgument for an empty train split and
/// kNumericalError if the loss diverges to a non-finite value.
TrainResult train(const Dataset& ds, const SplitIndices& splits, MlpArchitecture arch,
                  const TrainConfig& cfg);

struct Metrics {
  double rmse_ms = 0;
  double rmsle = 0;
  std::size_t count = 0;
};

Metrics evaluate(const MlpPredictor& p, const Dataset& ds, std::span<const std::size_t> indices);

struct DepthResult {
  std::int64_t depth = 0;
  std::vector<std::int64_t> hidden;
  Metrics test;
  Metrics validation;
  MlpPredictor predictor;
};

/// Trains one pyramid model per depth with otherwise identical settings.
std::vector<DepthResult> sweep_depth(const Dataset& ds, const SplitIndices& splits,
                                     std::span<const std::int64_t> depths,
                                     const MlpArchitecture& base, const TrainConfig& cfg);

void save_model(const MlpPredictor& p, const std::filesystem::path& path);
void save_model(const MlpPredictor& p, std::ostream& out);
/// Throws kParseError for malformed or truncated files and kVersionError for
/// another format version or feature schema.
MlpPredictor load_model(const std::filesystem::path& path);
MlpPredictor load_model(std::istream& in, std::string_view source_name = "<stream>");

}  // namespace epoch_oracle
