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

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "epoch_oracle/features.hpp"
#include "epoch_oracle/hardware.hpp"

namespace epoch_oracle {

inline constexpr std::size_t kTimedRuns = 5;

enum class RecordSource { kMeasuredHost, kImported };

/// One measured configuration.
struct BenchmarkRecord {
  LayerConfig config;
  HardwareProfile hw;
  std::array<double, kTimedRuns> run_times_ms{};
  double median_ms = 0;
  RecordSource source = RecordSource::kMeasuredHost;

  bool operator==(const BenchmarkRecord&) const = default;
};

/// Sorted middle element of exactly five finite values.
double median_of_5(std::span<const double> times_ms);

/// Builds a record, rounding each run time to 9 significant digits (the
/// precision persisted in CSV files) and filling in the median.
BenchmarkRecord make_record(const LayerConfig& config, const HardwareProfile& hw,
                            const std::array<double, kTimedRuns>& run_times_ms,
                            RecordSource source);

/// Throws kInvalidArgument if the config or hardware is invalid, a time is not
/// finite and positive, or the median is not the sorted middle run time.
void validate(const BenchmarkRecord& record);

/// Monotonic time source; injectable so tests can script the measured durations.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::nanoseconds now() = 0;
};

class SteadyClock final : public Clock {
 public:
  std::chrono::nanoseconds now() override;
};

/// Replays a fixed list of durations. Calls alternate start/stop: the clock
/// advances by the next duration on every second call.
class ScriptedClock final : public Clock {
 public:
  explicit ScriptedClock(std::vector<double> durations_ms);
  std::chrono::nanoseconds now() override;

 private:
  std::vector<double> durations_ms_;
  std::size_t calls_ = 0;
  std::chrono::nanoseconds time_{0};
};

/// The minimal single-layer computation for one config, with its tensors
/// allocated up front. run() executes one repetition: the forward pass, plus
/// backward pass and optimizer update unless the config is forward-only.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual void run() = 0;
};

struct BenchOptions {
  /// Upper bound on tensor memory for one workload.
  std::size_t max_bytes = std::size_t{2} << 30;
  /// Mixed with the config hash to seed the random input data.
  std::uint64_t data_seed = 0;
};

/// Approximate bytes of float tensor storage the workload for `config` needs.
std::size_t workload_bytes(const LayerConfig& config);

/// Throws kInvalidArgument for kinds without a reference kernel and
/// kResourceExhausted when the tensors would exceed options.max_bytes.
std::unique_ptr<Workload> make_workload(const LayerConfig& config,
                                        const BenchOptions& options = {});

/// One untimed warm-up run, then five timed runs; the record carries the median.
BenchmarkRecord run_benchmark(const LayerConfig& config, const HardwareProfile& hw, Clock& clock,
                              const BenchOptions& options = {});

struct MedianSpread {
  std::vector<double> medians_ms;
  double min_ms = 0;
  double max_ms = 0;
  /// (max - min) / min over the repeated medians.
  double relative_spread = 0;
};

/// Benchmarks one config `repeats` times and reports how far the medians spread.
MedianSpread repeat_benchmark(const LayerConfig& config, const HardwareProfile& hw, Clock& clock,
                              int repeats, const BenchOptions& options = {});

/// Destination for campaign records.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write(const BenchmarkRecord& record) = 0;
  /// Hashes (config_hash) of records the sink already holds, one entry per record.
  virtual std::vector<std::uint64_t> existing_hashes() const { return {}; }
};

class VectorSink final : public RecordSink {
 public:
  void write(const BenchmarkRecord& record) override { records.push_back(record); }
  std::vector<std::uint64_t> existing_hashes() const override;

  std::vector<BenchmarkRecord> records;
};

/// Samples `count` configs and benchmarks each one the sink does not already
/// hold, streaming records to the sink in sample order. Returns the number
/// written by this call. Progress goes to `log` (one line per record) when set.
std::int64_t run_campaign(const SpaceSpec& spec, std::int64_t count, std::uint64_t seed,
                          const HardwareProfile& hw, Clock& clock, RecordSink& sink,
                          std::ostream* log = nullptr, const BenchOptions& options = {});

}  // namespace epoch_oracle
