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

#include "epoch_oracle/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle {
namespace {

constexpr std::size_t kColumns = 28;

enum Column : std::size_t {
  kSchema,
  kOpType,
  kBatch,
  kActivation,
  kOptimizer,
  kDirection,
  kInDim,
  kOutDim,
  kMatrixSize,
  kKernel,
  kCIn,
  kCOut,
  kStride,
  kPadding,
  kHasBias,
  kHwName,
  kHwCores,
  kHwClock,
  kHwMem,
  kHwBandwidth,
  kHwPeak,
  kHwConnectivity,
  kT1,
  kMedian = kT1 + kTimedRuns,
};
static_assert(kMedian + 1 == kColumns);

constexpr std::string_view kForward = "forward";
constexpr std::string_view kForwardBackward = "forward_backward";

class RowParser {
 public:
  RowParser(std::vector<std::string_view> fields, std::string_view source, std::size_t line)
      : fields_(std::move(fields)), source_(source), line_(line) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kParseError,
         std::string(source_) + " line " + std::to_string(line_) + ": " + what);
  }

  std::string_view text(Column c) const { return fields_[c]; }

  std::int64_t integer(Column c) const {
    const auto v = try_parse_int(fields_[c]);
    if (!v) error("column " + std::to_string(c + 1) + " is not an integer");
    return *v;
  }

  double real(Column c) const {
    const auto v = try_parse_real(fields_[c]);
    if (!v || !std::isfinite(*v)) error("column " + std::to_string(c + 1) + " is not a number");
    return *v;
  }

  void expect_empty(std::initializer_list<Column> columns) const {
    for (Column c : columns) {
      if (!fields_[c].empty()) {
        error("column " + std::to_string(c + 1) + " does not apply to op_type " +
              std::string(fields_[kOpType]));
      }
    }
  }

 private:
  std::vector<std::string_view> fields_;
  std::string_view source_;
  std::size_t line_;
};

BenchmarkRecord parse_row(std::string_view line, std::string_view source, std::size_t line_no) {
  auto fields = split(line, ',');
  if (!fields.empty() && fields[kSchema] != kRecordSchemaId) {
    fail(ErrorCode::kVersionError, std::string(source) + " line " + std::to_string(line_no) +
                                       ": unknown schema_id '" + std::string(fields[kSchema]) +
                                       "'");
  }
  if (fields.size() != kColumns) {
    fail(ErrorCode::kParseError, std::string(source) + " line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(kColumns) + " fields, got " +
                                     std::to_string(fields.size()));
  }
  RowParser row(std::move(fields), source, line_no);

  BenchmarkRecord record;
  record.source = RecordSource::kImported;
  LayerConfig& config = record.config;
  try {
    config.batch_size = row.integer(kBatch);
    config.activation = parse_activation(row.text(kActivation));
    config.optimizer = parse_optimizer(row.text(kOptimizer));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    row.error(e.what());
  }
  const std::string_view direction = row.text(kDirection);
  if (direction != (config.forward_only() ? kForward : kForwardBackward)) {
    row.error("direction '" + std::string(direction) + "' does not match optimizer '" +
              std::string(row.text(kOptimizer)) + "'");
  }

  const std::string_view op = row.text(kOpType);
  if (op == "dense") {
    row.expect_empty({kMatrixSize, kKernel, kCIn, kCOut, kStride, kPadding});
    if (row.text(kHasBias) != "1") row.error("dense layers always have has_bias=1");
    config.shape = DenseShape{row.integer(kInDim), row.integer(kOutDim)};
  } else if (op == "conv2d") {
    row.expect_empty({kInDim, kOutDim});
    const auto bias = row.integer(kHasBias);
    if (bias != 0 && bias != 1) row.error("has_bias must be 0 or 1");
    config.shape = ConvShape{row.integer(kMatrixSize), row.integer(kKernel), row.integer(kCIn),
                             row.integer(kCOut),       row.integer(kStride), row.integer(kPadding),
                             bias == 1};
  } else if (op == "pool") {
    row.expect_empty({kInDim, kOutDim, kCOut, kHasBias});
    config.shape = PoolShape{row.integer(kMatrixSize), row.integer(kCIn), row.integer(kKernel),
                             row.integer(kStride), row.integer(kPadding)};
  } else {
    row.error("unknown op_type '" + std::string(op) + "'");
  }

  HardwareProfile& hw = record.hw;
  hw.name = std::string(row.text(kHwName));
  hw.core_count = row.integer(kHwCores);
  hw.clock_mhz = row.real(kHwClock);
  hw.memory_gb = row.real(kHwMem);
  hw.bandwidth_gbps = row.real(kHwBandwidth);
  hw.peak_gflops = row.real(kHwPeak);
  try {
    hw.connectivity = parse_connectivity(row.text(kHwConnectivity));
  } catch (const Error& e) {
    row.error(e.what());
  }

  for (std::size_t i = 0; i < kTimedRuns; ++i) {
    record.run_times_ms[i] = row.real(static_cast<Column>(kT1 + i));
  }
  record.median_ms = row.real(kMedian);
  try {
    validate(record);
  } catch (const Error& e) {
    row.error(e.what());
  }
  return record;
}

void append_optional(std::ostringstream& out, bool present, std::int64_t value) {
  out << ',';
  if (present) out << value;
}

}  // namespace

std::string csv_row(const BenchmarkRecord& record) {
  validate(record);
  const LayerConfig& c = record.config;
  require(c.kind() != LayerKind::kRecurrent, "CSV records cannot hold recurrent layers");
  std::ostringstream out;
  out << kRecordSchemaId << ',' << to_string(c.kind()) << ',' << c.batch_size << ','
      << to_string(c.activation) << ',' << to_string(c.optimizer) << ','
      << (c.forward_only() ? kForward : kForwardBackward);

  const auto* dense = std::get_if<DenseShape>(&c.shape);
  const auto* conv = std::get_if<ConvShape>(&c.shape);
  const auto* pool = std::get_if<PoolShape>(&c.shape);
  append_optional(out, dense, dense ? dense->inputs : 0);
  append_optional(out, dense, dense ? dense->outputs : 0);
  append_optional(out, conv || pool, conv ? conv->matrix_size : pool ? pool->matrix_size : 0);
  append_optional(out, conv || pool, conv ? conv->kernel : pool ? pool->kernel : 0);
  append_optional(out, conv || pool, conv ? conv->in_channels : pool ? pool->channels : 0);
  append_optional(out, conv, conv ? conv->out_channels : 0);
  append_optional(out, conv || pool, conv ? conv->stride : pool ? pool->stride : 0);
  append_optional(out, conv || pool, conv ? conv->padding : pool ? pool->padding : 0);
  append_optional(out, dense || conv, dense ? 1 : conv ? (conv->has_bias ? 1 : 0) : 0);

  const HardwareProfile& hw = record.hw;
  require(hw.name.find_first_of(",\n\r") == std::string::npos,
          "hardware name '" + hw.name + "' cannot be stored in a CSV field");
  out << ',' << hw.name << ',' << hw.core_count << ',' << format_real(hw.clock_mhz) << ','
      << format_real(hw.memory_gb) << ',' << format_real(hw.bandwidth_gbps) << ','
      << format_real(hw.peak_gflops) << ',' << to_string(hw.connectivity);
  for (double t : record.run_times_ms) out << ',' << format_real(t);
  out << ',' << format_real(record.median_ms);
  return out.str();
}

void write_csv(std::span<const BenchmarkRecord> records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
  if (!out) fail(ErrorCode::kIoError, "failed writing CSV");
}

void write_csv(std::span<const BenchmarkRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_csv(records, out);
  out.flush();
  if (!out) fail(ErrorCode::kIoError, "failed writing " + path.string());
}

Dataset read_csv(std::istream& in, std::string_view source_name) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kCsvHeader) {
        fail(ErrorCode::kParseError,
             std::string(source_name) + " line 1: missing or unexpected header row");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    ds.records.push_back(parse_row(line, source_name, line_no));
  }
  if (!header_seen) {
    fail(ErrorCode::kParseError, std::string(source_name) + " line 1: missing header row");
  }
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  return read_csv(in, path.string());
}

CsvRecordSink::CsvRecordSink(const std::filesystem::path& path) : path_(path) {
  const bool has_content =
      std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (has_content) {
    for (const auto& r : read_csv(path).records) existing_.push_back(config_hash(r.config, r.hw));
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for appending");
  if (!has_content) {
    out_ << kCsvHeader << '\n';
    out_.flush();
  }
}

void CsvRecordSink::write(const BenchmarkRecord& record) {
  out_ << csv_row(record) << '\n';
  out_.flush();
  if (!out_) fail(ErrorCode::kIoError, "failed appending to " + path_.string());
  existing_.push_back(config_hash(record.config, record.hw));
}

SplitIndices split(std::size_t n, std::uint64_t seed) {
  require(n >= 10, "split: need at least 10 records, have " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_test = n / 10;
  SplitIndices out;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test),
                        order.end());
  return out;
}

SplitIndices split(const Dataset& ds, std::uint64_t seed) { return split(ds.records.size(), seed); }

Scaler Scaler::identity() {
  Scaler s;
  for (const auto& slot : feature_slots()) s.kinds.push_back(slot.kind);
  s.mean.assign(s.kinds.size(), 0.0);
  s.stddev.assign(s.kinds.size(), 1.0);
  return s;
}

double Scaler::scale_target(double time_ms) const {
  return (std::log1p(time_ms) - target_mean) / target_stddev;
}

double Scaler::unscale_target(double z) const { return std::expm1(z * target_stddev + target_mean); }

namespace {

double pre_transform(SlotKind kind, double x) { return kind == SlotKind::kLog ? std::log1p(x) : x; }

// Population mean and standard deviation; a zero deviation is stored as 1.
std::pair<double, double> moments(const std::vector<double>& column) {
  double mean = 0;
  for (double x : column) mean += x;
  mean /= static_cast<double>(column.size());
  double var = 0;
  for (double x : column) var += (x - mean) * (x - mean);
  var /= static_cast<double>(column.size());
  const double sd = std::sqrt(var);
  return {mean, sd > 0 ? sd : 1.0};
}

}  // namespace

Scaler fit_scaler(std::span<const FeatureVector> rows, std::span<const double> targets_ms) {
  require(!rows.empty(), "fit_scaler: no training rows");
  require(rows.size() == targets_ms.size(), "fit_scaler: rows and targets differ in length");
  Scaler s = Scaler::identity();
  const std::size_t width = s.kinds.size();
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < width; ++j) {
    if (s.kinds[j] == SlotKind::kOneHot || s.kinds[j] == SlotKind::kFlag) continue;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].values.size() == width, "fit_scaler: feature vector has the wrong width");
      column[i] = pre_transform(s.kinds[j], rows[i].values[j]);
    }
    std::tie(s.mean[j], s.stddev[j]) = moments(column);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(targets_ms[i] >= 0, "fit_scaler: target times must be >= 0");
    column[i] = std::log1p(targets_ms[i]);
  }
  std::tie(s.target_mean, s.target_stddev) = moments(column);
  return s;
}

Scaler fit_scaler(const Dataset& ds, std::span<const std::size_t> train) {
  require(!train.empty(), "fit_scaler: train split is empty");
  std::vector<FeatureVector> rows;
  std::vector<double> targets;
  rows.reserve(train.size());
  for (std::size_t i : train) {
    require(i < ds.records.size(), "fit_scaler: split index out of range");
    rows.push_back(encode(ds.records[i].config, ds.records[i].hw));
    targets.push_back(ds.records[i].median_ms);
  }
  return fit_scaler(rows, targets);
}

FeatureVector apply_scaler(const Scaler& scaler, const FeatureVector& features) {
  require(features.values.size() == scaler.kinds.size(),
          "apply_scaler: feature vector width does not match the scaler");
  FeatureVector out = features;
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const SlotKind kind = scaler.kinds[j];
    if (kind == SlotKind::kOneHot || kind == SlotKind::kFlag) continue;
    out.values[j] = (pre_transform(kind, out.values[j]) - scaler.mean[j]) / scaler.stddev[j];
  }
  out.scaled = true;
  return out;
}

}  // namespace epoch_oracle
