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
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epoch_oracle/bench.hpp"
#include "epoch_oracle/features.hpp"

namespace epoch_oracle {

inline constexpr std::string_view kRecordSchemaId = "bench-v1";

inline constexpr std::string_view kCsvHeader =
    "schema_id,op_type,batch,activation,optimizer,direction,in_dim,out_dim,matrix_size,kernel,"
    "c_in,c_out,stride,padding,has_bias,hw_name,hw_cores,hw_clock_mhz,hw_mem_gb,hw_bw_gbps,"
    "hw_peak_gflops,hw_connectivity,t1_ms,t2_ms,t3_ms,t4_ms,t5_ms,t_median_ms";

struct Dataset {
  std::vector<BenchmarkRecord> records;
  std::string schema_id{kRecordSchemaId};
};

// CSV persistence. Fields that do not apply to a record's op_type are empty.
// Hardware technology and gpu_count are not part of the record schema; rows
// read back get an empty technology, gpu_count 1 and source kImported.

std::string csv_row(const BenchmarkRecord& record);
void write_csv(std::span<const BenchmarkRecord> records, std::ostream& out);
void write_csv(std::span<const BenchmarkRecord> records, const std::filesystem::path& path);

/// Throws kParseError naming the line for malformed rows and kVersionError for
/// an unknown schema_id. `source_name` is used in messages.
Dataset read_csv(std::istream& in, std::string_view source_name = "<stream>");
Dataset read_csv(const std::filesystem::path& path);

/// Appends records to a CSV file, writing the header first if the file is new
/// or empty. Records already in the file are reported for campaign resume.
class CsvRecordSink final : public RecordSink {
 public:
  explicit CsvRecordSink(const std::filesystem::path& path);
  void write(const BenchmarkRecord& record) override;
  std::vector<std::uint64_t> existing_hashes() const override { return existing_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<std::uint64_t> existing_;
};

// ---------------------------------------------------------------------------
// Splits.

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> validation;
  std::uint64_t seed = 0;
};

/// Seeded shuffle of 0..n-1 partitioned into floor(0.8n) / floor(0.1n) / rest.
/// Throws kInvalidArgument when n < 10.
SplitIndices split(std::size_t n, std::uint64_t seed);
SplitIndices split(const Dataset& ds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scaling. Numeric slots are z-scored, log-typed slots (dimensions, FLOPs)
// pass through log1p first, one-hot and flag slots are left alone. The target
// (median time in ms) is always log1p'd and z-scored.

struct Scaler {
  std::vector<SlotKind> kinds;
  std::vector<double> mean;
  std::vector<double> stddev;  // never 0; constant columns store 1
  double target_mean = 0;
  double target_stddev = 1;

  /// mean 0 / stddev 1 everywhere; transforms reduce to log1p on log slots.
  static Scaler identity();

  double scale_target(double time_ms) const;
  /// Inverse of scale_target; not clamped.
  double unscale_target(double z) const;

  bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(std::span<const FeatureVector> rows, std::span<const double> targets_ms);
/// Fits on the records at `train` only.
Scaler fit_scaler(const Dataset& ds, std::span<const std::size_t> train);

/// Not idempotent: apply exactly once. The result is marked scaled.
FeatureVector apply_scaler(const Scaler& scaler, const FeatureVector& features);

}  // namespace epoch_oracle
