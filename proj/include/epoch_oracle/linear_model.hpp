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
#include <span>
#include <string>
#include <vector>

#include "epoch_oracle/dataset.hpp"
#include "epoch_oracle/features.hpp"

namespace epoch_oracle {

/// Ordinary least squares on raw numeric feature slots, predicting time in ms.
struct LinearModel {
  /// Feature slot index of each weight.
  std::vector<std::size_t> slots;
  std::vector<double> weights;
  double intercept = 0;
  std::string schema_id{kFeatureSchemaId};
};

/// Numeric (linear and log-kind) slots; the FLOP slot only when asked for.
std::vector<std::size_t> linear_feature_slots(bool include_flops);

/// OLS with intercept on rows of `columns` values. Columns are standardised
/// internally and a constant column gets weight 0. The normal equations are
/// solved by Cholesky; a rank-deficient system is retried once with 1e-8
/// added to the diagonal and throws kNumericalError if it still fails.
/// `slots` of the result are 0..columns-1.
LinearModel fit_ols(std::span<const double> x, std::size_t columns, std::span<const double> y);

/// Fits on splits.train. Throws kInvalidArgument with fewer rows than features + 1.
LinearModel fit_linear(const Dataset& ds, const SplitIndices& splits, bool include_flops);

/// Intercept + w . x; not clamped, so it can be negative.
double predict_linear(const LinearModel& m, const LayerConfig& config, const HardwareProfile& hw);

}  // namespace epoch_oracle
