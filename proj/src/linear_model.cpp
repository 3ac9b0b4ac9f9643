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

#include "epoch_oracle/linear_model.hpp"

#include <cmath>
#include <optional>

#include "epoch_oracle/error.hpp"

namespace epoch_oracle {
namespace {

constexpr double kJitter = 1e-8;

// In-place Cholesky of a symmetric d x d matrix with unit diagonal; fails on a
// pivot that is not clearly positive.
bool cholesky(std::vector<double>& a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= a[j * d + k] * a[j * d + k];
    if (!(pivot > 1e-12)) return false;
    const double l = std::sqrt(pivot);
    a[j * d + j] = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = v / l;
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t d,
                                   std::vector<double> b) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * d + k] * b[k];
    b[i] /= l[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t k = i + 1; k < d; ++k) b[i] -= l[k * d + i] * b[k];
    b[i] /= l[i * d + i];
  }
  return b;
}

}  // namespace

std::vector<std::size_t> linear_feature_slots(bool include_flops) {
  const std::size_t flops = feature_index("flops");
  std::vector<std::size_t> out;
  const auto& slots = feature_slots();
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j].kind != SlotKind::kLinear && slots[j].kind != SlotKind::kLog) continue;
    if (j == flops && !include_flops) continue;
    out.push_back(j);
  }
  return out;
}

LinearModel fit_ols(std::span<const double> x, std::size_t columns, std::span<const double> y) {
  require(columns >= 1, "fit_ols: need at least one column");
  require(x.size() == y.size() * columns, "fit_ols: x must hold rows x columns values");
  const std::size_t n = y.size();
  require(n >= columns + 1, "fit_ols: need at least " + std::to_string(columns + 1) +
                                " rows, have " + std::to_string(n));

  double y_mean = 0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  std::vector<double> mean(columns, 0), scale(columns, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns; ++c) mean[c] += x[r * columns + c];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns; ++c) {
      const double d = x[r * columns + c] - mean[c];
      scale[c] += d * d;
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < columns; ++c) {
    scale[c] = std::sqrt(scale[c] / static_cast<double>(n));
    if (scale[c] > 0) active.push_back(c);
  }

  LinearModel model;
  for (std::size_t c = 0; c < columns; ++c) model.slots.push_back(c);
  model.weights.assign(columns, 0.0);
  model.intercept = y_mean;
  const std::size_t d = active.size();
  if (d == 0) return model;

  // Normal equations on centred, standardised columns.
  std::vector<double> gram(d * d, 0), rhs(d, 0), z(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t c = active[i];
      z[i] = (x[r * columns + c] - mean[c]) / scale[c];
    }
    const double yc = y[r] - y_mean;
    for (std::size_t i = 0; i < d; ++i) {
      rhs[i] += z[i] * yc;
      for (std::size_t j = 0; j <= i; ++j) gram[i * d + j] += z[i] * z[j];
    }
  }
  // Scaled to the correlation matrix so the jitter is relative to a unit diagonal.
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) {
    rhs[i] *= inv_n;
    for (std::size_t j = 0; j <= i; ++j) {
      gram[i * d + j] *= inv_n;
      gram[j * d + i] = gram[i * d + j];
    }
  }

  std::vector<double> factor = gram;
  if (!cholesky(factor, d)) {
    factor = gram;
    for (std::size_t i = 0; i < d; ++i) factor[i * d + i] += kJitter;
    if (!cholesky(factor, d)) {
      fail(ErrorCode::kNumericalError, "fit_ols: normal equations are singular");
    }
  }
  const auto beta = cholesky_solve(factor, d, rhs);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t c = active[i];
    model.weights[c] = beta[i] / scale[c];
    model.intercept -= model.weights[c] * mean[c];
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) fail(ErrorCode::kNumericalError, "fit_ols: non-finite coefficient");
  }
  return model;
}

LinearModel fit_linear(const Dataset& ds, const SplitIndices& splits, bool include_flops) {
  const auto slots = linear_feature_slots(include_flops);
  std::vector<double> x, y;
  x.reserve(splits.train.size() * slots.size());
  for (std::size_t i : splits.train) {
    require(i < ds.records.size(), "fit_linear: split index out of range");
    const auto& rec = ds.records[i];
    const auto f = encode(rec.config, rec.hw);
    for (std::size_t s : slots) x.push_back(f.values[s]);
    y.push_back(rec.median_ms);
  }
  LinearModel model = fit_ols(x, slots.size(), y);
  model.slots = slots;
  return model;
}

double predict_linear(const LinearModel& m, const LayerConfig& config, const HardwareProfile& hw) {
  if (m.schema_id != kFeatureSchemaId) {
    fail(ErrorCode::kVersionError, "linear model uses feature schema '" + m.schema_id + "'");
  }
  require(m.slots.size() == m.weights.size(), "linear model: slots and weights differ in length");
  const auto f = encode(config, hw);
  double y = m.intercept;
  for (std::size_t i = 0; i < m.slots.size(); ++i) y += m.weights[i] * f.values.at(m.slots[i]);
  return y;
}

}  // namespace epoch_oracle
