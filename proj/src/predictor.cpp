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

#include "epoch_oracle/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle {
namespace {

using kernels::DenseParams;
using kernels::Matrix;

std::int64_t resolved_input_dim(std::int64_t dim) {
  return dim == 0 ? static_cast<std::int64_t>(feature_count()) : dim;
}

std::size_t depth_of(const MlpPredictor& p) { return p.layers.size() - 1; }

// Activations of every layer for one batch. h[0] is the input, h[m] the final
// hidden layer after dropout, out the head output.
struct ForwardTrace {
  std::vector<Matrix<double>> h;
  std::vector<double> mask;  // empty when dropout is inactive
  Matrix<double> out;
};

ForwardTrace run_forward(const MlpPredictor& p, const Matrix<double>& x, ForwardMode mode) {
  require(!p.layers.empty(), "predictor has no layers");
  require(x.cols == p.layers.front().weights.rows,
          "feature width " + std::to_string(x.cols) + " does not match the model input " +
              std::to_string(p.layers.front().weights.rows));
  const std::size_t m = depth_of(p);
  ForwardTrace t;
  t.h.reserve(m + 1);
  t.h.push_back(x);
  for (std::size_t k = 0; k < m; ++k) {
    t.h.push_back(kernels::dense_forward(t.h.back(), p.layers[k], Activation::kRelu));
  }
  const double rate = p.arch.dropout_rate;
  if (mode.train && rate > 0) {
    std::mt19937_64 rng(mode.dropout_seed);
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    auto& last = t.h.back().data;
    t.mask.resize(last.size());
    for (std::size_t i = 0; i < last.size(); ++i) {
      t.mask[i] = keep(rng) ? scale : 0.0;
      last[i] *= t.mask[i];
    }
  }
  t.out = kernels::dense_forward(t.h.back(), p.layers.back(), Activation::kNone);
  return t;
}

Matrix<double> row_matrix(const FeatureVector& x) {
  Matrix<double> m(1, x.values.size());
  m.data = x.values;
  return m;
}

// Largest log1p(time) the head may produce; keeps expm1 finite.
constexpr double kMaxLogTime = 700.0;

double to_time_ms(const Scaler& scaler, double z) {
  const double log_time = std::min(z * scaler.target_stddev + scaler.target_mean, kMaxLogTime);
  const double ms = std::expm1(log_time);
  return ms > 0 ? ms : 0.0;
}

void check_times(std::span<const double> pred, std::span<const double> actual, const char* what) {
  require(pred.size() == actual.size(), std::string(what) + ": length mismatch");
  require(!pred.empty(), std::string(what) + ": no values");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require(pred[i] >= 0 && actual[i] >= 0,
            std::string(what) + ": times must be finite and >= 0");
  }
}

struct ScaledRows {
  Matrix<double> x;
  std::vector<double> actual_ms;
};

ScaledRows scaled_rows(const Scaler& scaler, const Dataset& ds,
                       std::span<const std::size_t> indices) {
  ScaledRows rows;
  rows.x = Matrix<double>(indices.size(), scaler.kinds.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < ds.records.size(), "split index out of range");
    const auto& rec = ds.records[indices[r]];
    const auto scaled = apply_scaler(scaler, encode(rec.config, rec.hw));
    std::copy(scaled.values.begin(), scaled.values.end(),
              rows.x.data.begin() + static_cast<std::ptrdiff_t>(r * rows.x.cols));
    rows.actual_ms.push_back(rec.median_ms);
  }
  return rows;
}

std::vector<double> predict_rows(const MlpPredictor& p, const Matrix<double>& x) {
  auto z = forward_batch(p, x);
  for (double& v : z) v = to_time_ms(p.scaler, v);
  return z;
}

}  // namespace

void MlpArchitecture::validate() const {
  require(input_dim >= 1, "arch: input_dim must be >= 1");
  require(!hidden.empty(), "arch: need at least one hidden layer");
  for (auto j : hidden) require(j >= 1, "arch: hidden widths must be >= 1");
  require(dropout_rate >= 0 && dropout_rate < 1, "arch: dropout_rate must be in [0, 1)");
  require(l2_lambda >= 0 && std::isfinite(l2_lambda), "arch: l2_lambda must be >= 0");
}

MlpArchitecture MlpArchitecture::pyramid(std::int64_t depth, std::int64_t input_dim) {
  require(depth >= 1 && depth <= 32, "pyramid depth must be in 1..32");
  MlpArchitecture arch;
  arch.input_dim = resolved_input_dim(input_dim);
  const std::int64_t top = std::min<std::int64_t>(512, std::int64_t{32} << (depth - 1));
  for (std::int64_t n = 0; n < depth; ++n) arch.hidden.push_back(std::max<std::int64_t>(8, top >> n));
  return arch;
}

bool MlpPredictor::models(LayerKind kind) const {
  return std::find(modeled_kinds.begin(), modeled_kinds.end(), kind) != modeled_kinds.end();
}

MlpPredictor init_predictor(const MlpArchitecture& arch_in, std::uint64_t seed) {
  MlpArchitecture arch = arch_in;
  arch.input_dim = resolved_input_dim(arch.input_dim);
  arch.validate();
  MlpPredictor p;
  p.arch = arch;
  if (static_cast<std::size_t>(arch.input_dim) == feature_count()) {
    p.scaler = Scaler::identity();
  } else {
    p.scaler.kinds.assign(static_cast<std::size_t>(arch.input_dim), SlotKind::kLinear);
    p.scaler.mean.assign(p.scaler.kinds.size(), 0.0);
    p.scaler.stddev.assign(p.scaler.kinds.size(), 1.0);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> dims{arch.input_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto fan_in = static_cast<std::size_t>(dims[k]);
    const auto fan_out = static_cast<std::size_t>(dims[k + 1]);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    DenseParams<double> layer;
    layer.weights = Matrix<double>(fan_in, fan_out);
    for (double& w : layer.weights.data) w = dist(rng);
    layer.bias = std::vector<double>(fan_out, 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

double forward(const MlpPredictor& p, const FeatureVector& x, ForwardMode mode) {
  require(x.scaled, "forward: feature vector must be scaled first");
  return run_forward(p, row_matrix(x), mode).out.data.at(0);
}

std::vector<double> forward_batch(const MlpPredictor& p, const Matrix<double>& x,
                                  ForwardMode mode) {
  return run_forward(p, x, mode).out.data;
}

double predict_time_ms(const MlpPredictor& p, const LayerConfig& config,
                       const HardwareProfile& hw) {
  if (p.schema_id != kFeatureSchemaId) {
    fail(ErrorCode::kVersionError, "model uses feature schema '" + p.schema_id +
                                       "', encoder is '" + std::string(kFeatureSchemaId) + "'");
  }
  const double z = forward(p, apply_scaler(p.scaler, encode(config, hw)));
  return to_time_ms(p.scaler, z);
}

LossGradient batch_loss_gradient(const MlpPredictor& p, const Matrix<double>& x,
                                 std::span<const double> z, ForwardMode mode) {
  require(z.size() == x.rows && x.rows > 0, "batch_loss_gradient: need one target per row");
  ForwardTrace t = run_forward(p, x, mode);
  const std::size_t m = depth_of(p);
  const double n = static_cast<double>(x.rows);
  const double l2 = p.arch.l2_lambda;

  LossGradient result;
  result.grads.resize(m + 1);
  Matrix<double> delta(x.rows, 1);
  double sq = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double e = t.out.data[r] - z[r];
    sq += e * e;
    delta.data[r] = 2.0 * e / n;
  }
  double penalty = 0;
  for (const auto& layer : p.layers) {
    for (double w : layer.weights.data) penalty += w * w;
  }
  result.loss = sq / n + l2 * penalty;

  for (std::size_t k = m + 1; k-- > 0;) {
    auto g = kernels::dense_backward(t.h[k], p.layers[k], Activation::kNone, delta);
    for (std::size_t i = 0; i < g.weights.data.size(); ++i) {
      g.weights.data[i] += 2.0 * l2 * p.layers[k].weights.data[i];
    }
    result.grads[k].weights = std::move(g.weights);
    result.grads[k].bias = std::move(g.bias);
    if (k == 0) break;
    delta = std::move(g.input);
    // Back through dropout (on the final hidden layer only), then ReLU.
    if (k == m && !t.mask.empty()) {
      for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= t.mask[i];
    }
    const auto& act = t.h[k].data;
    for (std::size_t i = 0; i < delta.data.size(); ++i) {
      if (act[i] <= 0) delta.data[i] = 0;
    }
  }
  return result;
}

double loss_rmsle(std::span<const double> pred_ms, std::span<const double> actual_ms) {
  check_times(pred_ms, actual_ms, "loss_rmsle");
  double sum = 0;
  for (std::size_t i = 0; i < pred_ms.size(); ++i) {
    const double d = std::log1p(pred_ms[i]) - std::log1p(actual_ms[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred_ms.size()));
}

double loss_rmse(std::span<const double> pred_ms, std::span<const double> actual_ms) {
  require(pred_ms.size() == actual_ms.size() && !pred_ms.empty(),
          "loss_rmse: need equal, non-empty lists");
  double sum = 0;
  for (std::size_t i = 0; i < pred_ms.size(); ++i) {
    const double d = pred_ms[i] - actual_ms[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred_ms.size()));
}

void TrainConfig::validate() const {
  require(epochs >= 1, "train: epochs must be >= 1");
  require(batch_size >= 1, "train: batch size must be >= 1");
  require(learning_rate > 0 && std::isfinite(learning_rate), "train: learning rate must be > 0");
  require(decay_every >= 1, "train: decay interval must be >= 1");
  require(decay_factor >= 1 && std::isfinite(decay_factor), "train: decay factor must be >= 1");
}

double TrainConfig::learning_rate_at(std::int64_t epoch) const {
  require(epoch >= 0, "learning_rate_at: epoch must be >= 0");
  return learning_rate / std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

TrainResult train(const Dataset& ds, const SplitIndices& splits, MlpArchitecture arch,
                  const TrainConfig& cfg) {
  cfg.validate();
  require(!splits.train.empty(), "train: the train split is empty");
  arch.input_dim = resolved_input_dim(arch.input_dim);
  require(static_cast<std::size_t>(arch.input_dim) == feature_count(),
          "train: input_dim must equal the feature count " + std::to_string(feature_count()));

  TrainResult result;
  MlpPredictor& p = result.predictor;
  p = init_predictor(arch, cfg.seed);
  p.scaler = fit_scaler(ds, splits.train);
  std::set<LayerKind> kinds;
  for (std::size_t i : splits.train) kinds.insert(ds.records[i].config.kind());
  p.modeled_kinds.assign(kinds.begin(), kinds.end());

  const ScaledRows train_rows = scaled_rows(p.scaler, ds, splits.train);
  std::vector<double> z;
  for (double t : train_rows.actual_ms) z.push_back(p.scaler.scale_target(t));
  const ScaledRows test_rows = scaled_rows(p.scaler, ds, splits.test);

  const std::size_t n = train_rows.x.rows;
  const std::size_t width = train_rows.x.cols;
  const std::size_t batch = std::min(n, static_cast<std::size_t>(cfg.batch_size));
  std::vector<kernels::OptimizerState<double>> weight_state(p.layers.size());
  std::vector<kernels::OptimizerState<double>> bias_state(p.layers.size());
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(cfg.seed ^ 0x5deece66dull);
  std::int64_t step = 0;

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t rows = std::min(batch, n - start);
      Matrix<double> xb(rows, width);
      std::vector<double> zb(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(train_rows.x.data.begin() + static_cast<std::ptrdiff_t>(src * width), width,
                    xb.data.begin() + static_cast<std::ptrdiff_t>(r * width));
        zb[r] = z[src];
      }
      const auto g = batch_loss_gradient(p, xb, zb, ForwardMode::training(rng()));
      if (!std::isfinite(g.loss)) {
        fail(ErrorCode::kNumericalError,
             "training diverged at epoch " + std::to_string(epoch) + "; try a lower learning rate");
      }
      loss_sum += g.loss;
      ++batches;
      ++step;
      for (std::size_t k = 0; k < p.layers.size(); ++k) {
        kernels::optimizer_step<double>(Optimizer::kAdam, p.layers[k].weights.data,
                                        g.grads[k].weights.data, weight_state[k], step, lr);
        kernels::optimizer_step<double>(Optimizer::kAdam, *p.layers[k].bias, *g.grads[k].bias,
                                        bias_state[k], step, lr);
      }
    }
    EpochLoss row{epoch, lr, loss_sum / static_cast<double>(batches),
                  std::numeric_limits<double>::quiet_NaN()};
    if (test_rows.x.rows > 0) {
      row.test_rmsle = loss_rmsle(predict_rows(p, test_rows.x), test_rows.actual_ms);
    }
    result.loss_curve.push_back(row);
  }
  return result;
}

Metrics evaluate(const MlpPredictor& p, const Dataset& ds, std::span<const std::size_t> indices) {
  require(!indices.empty(), "evaluate: no records selected");
  if (p.schema_id != kFeatureSchemaId) {
    fail(ErrorCode::kVersionError, "model uses feature schema '" + p.schema_id + "'");
  }
  const ScaledRows rows = scaled_rows(p.scaler, ds, indices);
  const auto pred = predict_rows(p, rows.x);
  return {loss_rmse(pred, rows.actual_ms), loss_rmsle(pred, rows.actual_ms), indices.size()};
}

std::vector<DepthResult> sweep_depth(const Dataset& ds, const SplitIndices& splits,
                                     std::span<const std::int64_t> depths,
                                     const MlpArchitecture& base, const TrainConfig& cfg) {
  require(!depths.empty(), "sweep_depth: no depths given");
  std::vector<DepthResult> out;
  for (std::int64_t depth : depths) {
    MlpArchitecture arch = MlpArchitecture::pyramid(depth, base.input_dim);
    arch.dropout_rate = base.dropout_rate;
    arch.l2_lambda = base.l2_lambda;
    const auto trained = train(ds, splits, arch, cfg);
    DepthResult r{depth, arch.hidden, {}, {}, trained.predictor};
    if (!splits.test.empty()) r.test = evaluate(trained.predictor, ds, splits.test);
    if (!splits.validation.empty()) {
      r.validation = evaluate(trained.predictor, ds, splits.validation);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files.

void save_model(const MlpPredictor& p, std::ostream& out) {
  auto real = [](double v) { return format_real(v, 17); };
  out << kModelFormat << '\n' << "schema " << p.schema_id << '\n' << "arch " << p.arch.input_dim;
  for (auto j : p.arch.hidden) out << ' ' << j;
  out << " 1\n"
      << "dropout " << real(p.arch.dropout_rate) << '\n'
      << "l2 " << real(p.arch.l2_lambda) << '\n'
      << "layers";
  for (auto kind : p.modeled_kinds) out << ' ' << to_string(kind);
  out << '\n' << "scaler " << p.scaler.mean.size() << '\n';
  for (std::size_t j = 0; j < p.scaler.mean.size(); ++j) {
    out << real(p.scaler.mean[j]) << ' ' << real(p.scaler.stddev[j]) << '\n';
  }
  out << "target " << real(p.scaler.target_mean) << ' ' << real(p.scaler.target_stddev) << '\n';
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const auto& w = p.layers[k].weights;
    out << 'W' << (k + 1) << ' ' << w.rows << ' ' << w.cols << '\n';
    for (std::size_t r = 0; r < w.rows; ++r) {
      for (std::size_t c = 0; c < w.cols; ++c) out << (c ? " " : "") << real(w(r, c));
      out << '\n';
    }
    const auto& b = *p.layers[k].bias;
    out << 'b' << (k + 1) << ' ' << b.size() << '\n';
    for (std::size_t c = 0; c < b.size(); ++c) out << (c ? " " : "") << real(b[c]);
    out << '\n';
  }
  out << "end\n";
  if (!out) fail(ErrorCode::kIoError, "failed writing model");
}

void save_model(const MlpPredictor& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  save_model(p, out);
  out.flush();
  if (!out) fail(ErrorCode::kIoError, "failed writing " + path.string());
}

namespace {

class ModelReader {
 public:
  ModelReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kParseError,
         std::string(source_) + " line " + std::to_string(line_no_) + ": " + what);
  }

  std::string_view line() {
    if (!std::getline(in_, line_)) {
      ++line_no_;
      error("unexpected end of file");
    }
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    return line_;
  }

  double single_real(std::string_view key) {
    const auto fields = keyed(key);
    if (fields.size() != 1) error("expected a single value after '" + std::string(key) + "'");
    return real(fields[0]);
  }

  /// Reads a line "<key> <fields...>" and returns the fields, which stay valid
  /// until the next read.
  std::vector<std::string_view> keyed(std::string_view key) {
    auto fields = words(line());
    if (fields.empty() || fields[0] != key) error("expected '" + std::string(key) + "'");
    fields.erase(fields.begin());
    return fields;
  }

  std::vector<std::string_view> words(std::string_view text) const {
    std::vector<std::string_view> out;
    for (auto w : split(text, ' ')) {
      if (!w.empty()) out.push_back(w);
    }
    return out;
  }

  double real(std::string_view text) const {
    const auto v = try_parse_real(text);
    if (!v || !std::isfinite(*v)) error("bad number '" + std::string(text) + "'");
    return *v;
  }

  std::int64_t integer(std::string_view text) const {
    const auto v = try_parse_int(text);
    if (!v || *v < 0) error("bad count '" + std::string(text) + "'");
    return *v;
  }

  std::vector<double> reals(std::size_t expected) {
    auto fields = words(line());
    if (fields.size() != expected) {
      error("expected " + std::to_string(expected) + " values, got " +
            std::to_string(fields.size()));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (auto f : fields) out.push_back(real(f));
    return out;
  }

 private:
  std::istream& in_;
  std::string_view source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace

MlpPredictor load_model(std::istream& in, std::string_view source_name) {
  ModelReader reader(in, source_name);
  const std::string_view magic = reader.line();
  if (magic != kModelFormat) {
    if (magic.substr(0, 14) == "mlp-predictor ") {
      fail(ErrorCode::kVersionError, std::string(source_name) + ": unsupported model format '" +
                                         std::string(magic) + "'");
    }
    reader.error("not a model file");
  }
  const auto schema = reader.keyed("schema");
  if (schema.size() != 1) reader.error("expected one schema id");
  if (schema[0] != kFeatureSchemaId) {
    fail(ErrorCode::kVersionError, std::string(source_name) + ": model feature schema '" +
                                       std::string(schema[0]) + "' does not match encoder '" +
                                       std::string(kFeatureSchemaId) + "'");
  }

  const auto dims_text = reader.keyed("arch");
  if (dims_text.size() < 3) reader.error("arch needs input, hidden and output sizes");
  std::vector<std::int64_t> dims;
  for (auto d : dims_text) dims.push_back(reader.integer(d));
  if (dims.back() != 1) reader.error("output size must be 1");

  MlpArchitecture arch;
  arch.input_dim = dims.front();
  arch.hidden.assign(dims.begin() + 1, dims.end() - 1);
  arch.dropout_rate = reader.single_real("dropout");
  arch.l2_lambda = reader.single_real("l2");
  if (static_cast<std::size_t>(arch.input_dim) != feature_count()) {
    reader.error("input size must be " + std::to_string(feature_count()));
  }
  try {
    arch.validate();
  } catch (const Error& e) {
    reader.error(e.what());
  }

  MlpPredictor p;
  p.arch = arch;
  p.schema_id = std::string(kFeatureSchemaId);
  for (auto kind : reader.keyed("layers")) {
    try {
      p.modeled_kinds.push_back(parse_layer_kind(kind));
    } catch (const Error& e) {
      reader.error(e.what());
    }
  }

  const auto scaler_size = reader.keyed("scaler");
  if (scaler_size.size() != 1 || reader.integer(scaler_size[0]) != arch.input_dim) {
    reader.error("scaler size must match the input size");
  }
  p.scaler = Scaler::identity();
  for (std::size_t j = 0; j < p.scaler.kinds.size(); ++j) {
    const auto pair = reader.reals(2);
    if (pair[1] <= 0) reader.error("scaler stddev must be > 0");
    p.scaler.mean[j] = pair[0];
    p.scaler.stddev[j] = pair[1];
  }
  const auto target = reader.keyed("target");
  if (target.size() != 2) reader.error("target needs mean and stddev");
  p.scaler.target_mean = reader.real(target[0]);
  p.scaler.target_stddev = reader.real(target[1]);
  if (p.scaler.target_stddev <= 0) reader.error("target stddev must be > 0");

  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto rows = static_cast<std::size_t>(dims[k]);
    const auto cols = static_cast<std::size_t>(dims[k + 1]);
    const std::string index = std::to_string(k + 1);
    const auto wdims = reader.keyed("W" + index);
    if (wdims.size() != 2 || static_cast<std::size_t>(reader.integer(wdims[0])) != rows ||
        static_cast<std::size_t>(reader.integer(wdims[1])) != cols) {
      reader.error("W" + index + " must be " + std::to_string(rows) + " x " +
                   std::to_string(cols));
    }
    DenseParams<double> layer;
    layer.weights = Matrix<double>(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto values = reader.reals(cols);
      std::copy(values.begin(), values.end(),
                layer.weights.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    const auto bdims = reader.keyed("b" + index);
    if (bdims.size() != 1 || static_cast<std::size_t>(reader.integer(bdims[0])) != cols) {
      reader.error("b" + index + " must have " + std::to_string(cols) + " values");
    }
    layer.bias = reader.reals(cols);
    p.layers.push_back(std::move(layer));
  }
  reader.keyed("end");
  return p;
}

MlpPredictor load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  return load_model(in, path.string());
}

}  // namespace epoch_oracle
