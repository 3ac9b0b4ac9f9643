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

#include "epoch_oracle/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <new>
#include <random>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/kernels.hpp"
#include "epoch_oracle/shape.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle {
namespace {

constexpr float kBenchLearningRate = 0.01f;

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = dist(rng);
  return v;
}

std::size_t as_size(std::int64_t v) { return static_cast<std::size_t>(v); }

class DenseWorkload final : public Workload {
 public:
  DenseWorkload(const LayerConfig& config, const DenseShape& shape, std::mt19937_64& rng)
      : act_(config.activation), optimizer_(config.optimizer) {
    const std::size_t b = as_size(config.batch_size);
    const std::size_t in = as_size(shape.inputs);
    const std::size_t out = as_size(shape.outputs);
    input_ = kernels::Matrix<float>(b, in);
    input_.data = random_floats(rng, b * in);
    params_.weights = kernels::Matrix<float>(in, out);
    params_.weights.data = random_floats(rng, in * out);
    params_.bias = random_floats(rng, out);
    if (optimizer_ != Optimizer::kNone) {
      upstream_ = kernels::Matrix<float>(b, out);
      upstream_.data = random_floats(rng, b * out);
    }
  }

  void run() override {
    const auto out = kernels::dense_forward(input_, params_, act_);
    if (optimizer_ == Optimizer::kNone) return;
    const auto grads = kernels::dense_backward(input_, params_, act_, upstream_);
    ++step_;
    kernels::optimizer_step<float>(optimizer_, params_.weights.data, grads.weights.data,
                                   weight_state_, step_, kBenchLearningRate);
    kernels::optimizer_step<float>(optimizer_, *params_.bias, grads.bias, bias_state_, step_,
                                   kBenchLearningRate);
  }

 private:
  Activation act_;
  Optimizer optimizer_;
  kernels::Matrix<float> input_;
  kernels::Matrix<float> upstream_;
  kernels::DenseParams<float> params_;
  kernels::OptimizerState<float> weight_state_;
  kernels::OptimizerState<float> bias_state_;
  std::int64_t step_ = 0;
};

class ConvWorkload final : public Workload {
 public:
  ConvWorkload(const LayerConfig& config, const ConvShape& shape, std::mt19937_64& rng)
      : act_(config.activation), optimizer_(config.optimizer) {
    const std::size_t b = as_size(config.batch_size);
    const std::size_t h = as_size(shape.matrix_size);
    input_ = kernels::Tensor4<float>(b, h, h, as_size(shape.in_channels));
    input_.data = random_floats(rng, input_.data.size());
    params_.kernel = as_size(shape.kernel);
    params_.in_channels = as_size(shape.in_channels);
    params_.out_channels = as_size(shape.out_channels);
    params_.stride = as_size(shape.stride);
    params_.padding = as_size(shape.padding);
    params_.weights = random_floats(
        rng, params_.kernel * params_.kernel * params_.in_channels * params_.out_channels);
    if (shape.has_bias) params_.bias = random_floats(rng, params_.out_channels);
    if (optimizer_ != Optimizer::kNone) {
      const std::size_t out =
          as_size(output_dim(shape.matrix_size, shape.kernel, shape.stride, shape.padding));
      upstream_ = kernels::Tensor4<float>(b, out, out, params_.out_channels);
      upstream_.data = random_floats(rng, upstream_.data.size());
    }
  }

  void run() override {
    const auto out = kernels::conv2d_forward(input_, params_, act_);
    if (optimizer_ == Optimizer::kNone) return;
    const auto grads = kernels::conv2d_backward(input_, params_, act_, upstream_);
    ++step_;
    kernels::optimizer_step<float>(optimizer_, params_.weights, grads.weights, weight_state_,
                                   step_, kBenchLearningRate);
    if (params_.bias) {
      kernels::optimizer_step<float>(optimizer_, *params_.bias, grads.bias, bias_state_, step_,
                                     kBenchLearningRate);
    }
  }

 private:
  Activation act_;
  Optimizer optimizer_;
  kernels::Tensor4<float> input_;
  kernels::Tensor4<float> upstream_;
  kernels::ConvParams<float> params_;
  kernels::OptimizerState<float> weight_state_;
  kernels::OptimizerState<float> bias_state_;
  std::int64_t step_ = 0;
};

// Pooling has no parameters, so a training step is forward plus gradient routing.
class PoolWorkload final : public Workload {
 public:
  PoolWorkload(const LayerConfig& config, const PoolShape& shape, std::mt19937_64& rng)
      : backward_(!config.forward_only()),
        kernel_(as_size(shape.kernel)),
        stride_(as_size(shape.stride)),
        padding_(as_size(shape.padding)) {
    const std::size_t b = as_size(config.batch_size);
    const std::size_t h = as_size(shape.matrix_size);
    input_ = kernels::Tensor4<float>(b, h, h, as_size(shape.channels));
    input_.data = random_floats(rng, input_.data.size());
    if (backward_) {
      const std::size_t out =
          as_size(output_dim(shape.matrix_size, shape.kernel, shape.stride, shape.padding));
      upstream_ = kernels::Tensor4<float>(b, out, out, input_.channels);
      upstream_.data = random_floats(rng, upstream_.data.size());
    }
  }

  void run() override {
    const auto out = kernels::maxpool_forward(input_, kernel_, stride_, padding_);
    if (!backward_) return;
    const auto grad = kernels::maxpool_backward(input_, kernel_, stride_, padding_, upstream_);
  }

 private:
  bool backward_;
  std::size_t kernel_, stride_, padding_;
  kernels::Tensor4<float> input_;
  kernels::Tensor4<float> upstream_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double median_of_5(std::span<const double> times_ms) {
  require(times_ms.size() == kTimedRuns, "median_of_5: expected exactly five run times");
  std::array<double, kTimedRuns> sorted{};
  for (std::size_t i = 0; i < kTimedRuns; ++i) {
    require(std::isfinite(times_ms[i]), "median_of_5: run times must be finite");
    sorted[i] = times_ms[i];
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted[kTimedRuns / 2];
}

BenchmarkRecord make_record(const LayerConfig& config, const HardwareProfile& hw,
                            const std::array<double, kTimedRuns>& run_times_ms,
                            RecordSource source) {
  BenchmarkRecord record{config, hw, {}, 0.0, source};
  for (std::size_t i = 0; i < kTimedRuns; ++i) {
    record.run_times_ms[i] = round_significant(run_times_ms[i], 9);
  }
  record.median_ms = median_of_5(record.run_times_ms);
  validate(record);
  return record;
}

void validate(const BenchmarkRecord& record) {
  validate(record.config);
  validate(record.hw);
  for (double t : record.run_times_ms) {
    require(std::isfinite(t) && t > 0, "benchmark record: run times must be finite and > 0");
  }
  require(record.median_ms == median_of_5(record.run_times_ms),
          "benchmark record: median is not the middle run time");
}

std::chrono::nanoseconds SteadyClock::now() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now().time_since_epoch());
}

ScriptedClock::ScriptedClock(std::vector<double> durations_ms)
    : durations_ms_(std::move(durations_ms)) {}

std::chrono::nanoseconds ScriptedClock::now() {
  const std::size_t call = calls_++;
  if (call % 2 == 1) {
    const std::size_t index = call / 2;
    require(index < durations_ms_.size(), "ScriptedClock: ran out of scripted durations");
    time_ += std::chrono::nanoseconds(std::llround(durations_ms_[index] * 1e6));
  }
  return time_;
}

std::size_t workload_bytes(const LayerConfig& config) {
  // input + output + upstream + input grad + 4 copies of the parameters
  // (weights, grads, two optimizer slots), all float.
  const double b = static_cast<double>(config.batch_size);
  double elements = 0;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DenseShape>) {
          const double in = static_cast<double>(s.inputs), out = static_cast<double>(s.outputs);
          elements = 2 * b * in + 2 * b * out + 4 * (in * out + out);
        } else if constexpr (std::is_same_v<S, ConvShape>) {
          const double h = static_cast<double>(s.matrix_size);
          const double o =
              static_cast<double>(output_dim(s.matrix_size, s.kernel, s.stride, s.padding));
          const double k = static_cast<double>(s.kernel);
          elements = 2 * b * h * h * static_cast<double>(s.in_channels) +
                     2 * b * o * o * static_cast<double>(s.out_channels) +
                     4 * (k * k * static_cast<double>(s.in_channels * s.out_channels) +
                          static_cast<double>(s.out_channels));
        } else if constexpr (std::is_same_v<S, PoolShape>) {
          const double h = static_cast<double>(s.matrix_size);
          const double o =
              static_cast<double>(output_dim(s.matrix_size, s.kernel, s.stride, s.padding));
          elements = 2 * b * static_cast<double>(s.channels) * (h * h + o * o);
        }
      },
      config.shape);
  const double bytes = elements * sizeof(float);
  return bytes >= 1.8e19 ? std::size_t(-1) : static_cast<std::size_t>(bytes);
}

std::unique_ptr<Workload> make_workload(const LayerConfig& config, const BenchOptions& options) {
  validate(config);
  if (config.kind() == LayerKind::kRecurrent) {
    fail(ErrorCode::kInvalidArgument, "no reference kernel for recurrent layers");
  }
  const std::size_t bytes = workload_bytes(config);
  if (bytes > options.max_bytes) {
    fail(ErrorCode::kResourceExhausted, "workload for " + canonical_string(config) + " needs " +
                                            std::to_string(bytes) + " bytes, limit is " +
                                            std::to_string(options.max_bytes));
  }
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : canonical_string(config)) hash = (hash ^ c) * 1099511628211ull;
  std::mt19937_64 rng(mix(hash, options.data_seed));
  try {
    return std::visit(
        [&](const auto& s) -> std::unique_ptr<Workload> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, DenseShape>) {
            return std::make_unique<DenseWorkload>(config, s, rng);
          } else if constexpr (std::is_same_v<S, ConvShape>) {
            return std::make_unique<ConvWorkload>(config, s, rng);
          } else if constexpr (std::is_same_v<S, PoolShape>) {
            return std::make_unique<PoolWorkload>(config, s, rng);
          } else {
            return nullptr;
          }
        },
        config.shape);
  } catch (const std::bad_alloc&) {
    fail(ErrorCode::kResourceExhausted, "allocation failed for " + canonical_string(config));
  }
}

BenchmarkRecord run_benchmark(const LayerConfig& config, const HardwareProfile& hw, Clock& clock,
                              const BenchOptions& options) {
  validate(hw);
  auto workload = make_workload(config, options);
  std::array<double, kTimedRuns> times{};
  try {
    workload->run();  // warm-up
    for (double& t : times) {
      const auto start = clock.now();
      workload->run();
      const auto stop = clock.now();
      t = std::chrono::duration<double, std::milli>(stop - start).count();
      // A run faster than the clock can resolve is recorded as one tick.
      if (t <= 0) t = 1e-6;
    }
  } catch (const std::bad_alloc&) {
    fail(ErrorCode::kResourceExhausted, "allocation failed for " + canonical_string(config));
  }
  return make_record(config, hw, times, RecordSource::kMeasuredHost);
}

MedianSpread repeat_benchmark(const LayerConfig& config, const HardwareProfile& hw, Clock& clock,
                              int repeats, const BenchOptions& options) {
  require(repeats >= 1, "repeat_benchmark: repeats must be >= 1");
  MedianSpread spread;
  for (int i = 0; i < repeats; ++i) {
    spread.medians_ms.push_back(run_benchmark(config, hw, clock, options).median_ms);
  }
  const auto [lo, hi] = std::minmax_element(spread.medians_ms.begin(), spread.medians_ms.end());
  spread.min_ms = *lo;
  spread.max_ms = *hi;
  spread.relative_spread = (spread.max_ms - spread.min_ms) / spread.min_ms;
  return spread;
}

std::vector<std::uint64_t> VectorSink::existing_hashes() const {
  std::vector<std::uint64_t> hashes;
  hashes.reserve(records.size());
  for (const auto& r : records) hashes.push_back(config_hash(r.config, r.hw));
  return hashes;
}

std::int64_t run_campaign(const SpaceSpec& spec, std::int64_t count, std::uint64_t seed,
                          const HardwareProfile& hw, Clock& clock, RecordSink& sink,
                          std::ostream* log, const BenchOptions& options) {
  require(count >= 0, "run_campaign: count must be >= 0");
  const auto configs = sample_space(spec, count, seed);

  // Multiset of what the sink already has, so resampled duplicates are only
  // skipped as many times as they were already recorded.
  std::map<std::uint64_t, std::int64_t> present;
  for (std::uint64_t h : sink.existing_hashes()) ++present[h];

  std::int64_t written = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto hash = config_hash(configs[i], hw);
    if (auto it = present.find(hash); it != present.end() && it->second > 0) {
      --it->second;
      continue;
    }
    const auto record = run_benchmark(configs[i], hw, clock, options);
    sink.write(record);
    ++written;
    if (log) {
      *log << "[" << (i + 1) << "/" << configs.size() << "] " << canonical_string(record.config)
           << " median_ms=" << format_real(record.median_ms, 6) << '\n';
    }
  }
  return written;
}

}  // namespace epoch_oracle
