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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "epoch_oracle/features.hpp"
#include "epoch_oracle/shape.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#ifndef EPOCH_ORACLE_DATA_DIR
#error "EPOCH_ORACLE_DATA_DIR must be defined"
#endif

namespace epoch_oracle {
namespace {

using testing::expect_code;

HardwareProfile test_hw() {
  HardwareProfile hw;
  hw.name = "test";
  hw.technology = "host-CPU";
  hw.memory_gb = 8;
  hw.clock_mhz = 2000;
  hw.bandwidth_gbps = 20;
  hw.core_count = 4;
  hw.peak_gflops = 64;
  return hw;
}

LayerConfig dense(std::int64_t b, std::int64_t i, std::int64_t o, Activation act = Activation::kNone) {
  LayerConfig c;
  c.batch_size = b;
  c.activation = act;
  c.shape = DenseShape{i, o};
  return c;
}

TEST(OutputDim, Examples) {
  EXPECT_EQ(output_dim(3, 3, 1, 0), 1);
  EXPECT_EQ(output_dim(224, 3, 1, 1), 224);
  EXPECT_EQ(output_dim(5, 2, 2, 0), 2);
}

TEST(OutputDim, MatchesWindowEnumeration) {
  for (std::int64_t h = 1; h <= 12; ++h)
    for (std::int64_t k = 1; k <= 7; ++k)
      for (std::int64_t s = 1; s <= 4; ++s)
        for (std::int64_t p = 0; p <= 3; ++p) {
          std::int64_t origins = 0;
          for (std::int64_t y = -p; y + k <= h + p; y += s) ++origins;
          if (origins == 0) {
            expect_code(ErrorCode::kInvalidArgument, [&] { output_dim(h, k, s, p); });
          } else {
            EXPECT_EQ(output_dim(h, k, s, p), origins);
          }
        }
}

TEST(OutputDim, RejectsBadArguments) {
  expect_code(ErrorCode::kInvalidArgument, [] { output_dim(2, 3, 1, 0); });
  expect_code(ErrorCode::kInvalidArgument, [] { output_dim(0, 1, 1, 0); });
  expect_code(ErrorCode::kInvalidArgument, [] { output_dim(4, 1, 0, 0); });
  expect_code(ErrorCode::kInvalidArgument, [] { output_dim(4, 1, 1, -1); });
}

TEST(Flops, DenseExamples) {
  EXPECT_EQ(flops_dense(1, 1, 1, false), 1);
  EXPECT_EQ(flops_dense(2, 3, 4, true), 48);
  EXPECT_EQ(flops_dense(1, 4096, 4096, false), 33'550'336);
}

TEST(Flops, ConvExamples) {
  EXPECT_EQ(flops_conv(1, 1, 1, 1, 1, 1, 0, false), 1);
  EXPECT_EQ(flops_conv(1, 3, 3, 1, 1, 1, 0, false), 17);
}

TEST(Flops, MatchInstrumentedLoopCounts) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::int64_t> small(1, 6), k(1, 4), s(1, 3), p(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = small(rng), i = small(rng), o = small(rng);
    const bool bias = trial % 2 == 0;
    EXPECT_EQ(flops_dense(b, i, o, bias), testing::counted_dense_flops(b, i, o, bias));

    std::int64_t h = 0, kk = 0, pad = 0;
    do {
      h = small(rng) + 2;
      kk = k(rng);
      pad = p(rng);
    } while (h + 2 * pad < kk);
    const auto stride = s(rng);
    const auto ci = small(rng), co = small(rng);
    EXPECT_EQ(flops_conv(b, h, kk, ci, co, stride, pad, bias),
              testing::counted_conv_flops(b, h, kk, ci, co, stride, pad, bias));
  }
}

TEST(Flops, PointwiseConvOnSinglePixelEqualsDense) {
  for (std::int64_t b = 1; b <= 4; ++b)
    for (std::int64_t ci = 1; ci <= 5; ++ci)
      for (std::int64_t co = 1; co <= 5; ++co)
        for (bool bias : {false, true})
          EXPECT_EQ(flops_conv(b, 1, 1, ci, co, 1, 0, bias), flops_dense(b, ci, co, bias));
}

TEST(Flops, InvalidConvShapeIsInvalidArgument) {
  expect_code(ErrorCode::kInvalidArgument, [] { flops_conv(1, 2, 5, 1, 1, 1, 0, false); });
}

TEST(Encode, ActivationOneHotOrder) {
  const auto fv = encode(dense(4, 8, 8, Activation::kRelu), test_hw());
  const std::size_t base = feature_index("act_none");
  std::vector<double> group(fv.values.begin() + static_cast<std::ptrdiff_t>(base),
                            fv.values.begin() + static_cast<std::ptrdiff_t>(base + 5));
  EXPECT_EQ(group, (std::vector<double>{0, 1, 0, 0, 0}));
  EXPECT_EQ(fv.schema_id, kFeatureSchemaId);
  EXPECT_FALSE(fv.scaled);
}

TEST(Encode, Deterministic) {
  EXPECT_EQ(encode(dense(4, 8, 16), test_hw()).values, encode(dense(4, 8, 16), test_hw()).values);
}

TEST(Encode, AbsentFieldsAreZero) {
  const auto fv = encode(dense(4, 8, 16), test_hw());
  for (std::size_t i = 0; i < feature_count(); ++i) {
    const auto name = feature_slots()[i].name;
    if (name.starts_with("conv_") || name.starts_with("pool_") || name.starts_with("rnn_")) {
      EXPECT_EQ(fv.values[i], 0.0) << name;
    }
  }
  EXPECT_EQ(fv.values[feature_index("dense_inputs")], 8.0);
  EXPECT_EQ(fv.values[feature_index("dense_outputs")], 16.0);
  EXPECT_EQ(fv.values[feature_index("flops")], static_cast<double>(flops_dense(4, 8, 16, true)));
}

TEST(Encode, ForwardOnlyUsesNoneOptimizerSlot) {
  auto c = dense(1, 2, 3);
  EXPECT_EQ(encode(c, test_hw()).values[feature_index("opt_none")], 1.0);
  c.optimizer = Optimizer::kAdam;
  const auto fv = encode(c, test_hw());
  EXPECT_EQ(fv.values[feature_index("opt_none")], 0.0);
  EXPECT_EQ(fv.values[feature_index("opt_adam")], 1.0);
}

TEST(Encode, HardwareFieldsAreCarried) {
  const auto fv = encode(dense(1, 2, 3), test_hw());
  EXPECT_EQ(fv.values[feature_index("hw_cores")], 4.0);
  EXPECT_EQ(fv.values[feature_index("hw_clock_mhz")], 2000.0);
  EXPECT_EQ(fv.values[feature_index("hw_bandwidth_gbps")], 20.0);
  EXPECT_EQ(fv.values[feature_index("conn_host")], 1.0);
}

TEST(Encode, RecurrentAndPoolConfigsEncode) {
  LayerConfig rnn;
  rnn.shape = RecurrentShape{16, 32, RecurrenceType::kLstm, true};
  const auto fv = encode(rnn, test_hw());
  check_feature_vector(fv);
  EXPECT_EQ(fv.values[feature_index("rnn_lstm")], 1.0);
  EXPECT_EQ(fv.values[feature_index("rnn_bidirectional")], 1.0);
  LayerConfig pool;
  pool.shape = PoolShape{8, 3, 2, 2, 0};
  check_feature_vector(encode(pool, test_hw()));
}

TEST(Encode, InvalidConfigIsInvalidArgument) {
  expect_code(ErrorCode::kInvalidArgument, [] { encode(dense(0, 2, 3), test_hw()); });
  LayerConfig conv;
  conv.shape = ConvShape{2, 5, 1, 1, 1, 0, false};
  expect_code(ErrorCode::kInvalidArgument, [&] { encode(conv, test_hw()); });
  auto hw = test_hw();
  hw.clock_mhz = 0;
  expect_code(ErrorCode::kInvalidArgument, [&] { encode(dense(1, 1, 1), hw); });
}

TEST(SampleSpace, ZeroCountIsEmpty) {
  EXPECT_TRUE(sample_space(SpaceSpec{}, 0, 1).empty());
}

TEST(SampleSpace, SameSeedSameList) {
  EXPECT_EQ(sample_space(SpaceSpec{}, 200, 42), sample_space(SpaceSpec{}, 200, 42));
  EXPECT_NE(sample_space(SpaceSpec{}, 200, 42), sample_space(SpaceSpec{}, 200, 43));
}

TEST(SampleSpace, UniformBatchMean) {
  SpaceSpec spec;
  spec.kinds = {LayerKind::kDense};
  const auto configs = sample_space(spec, 10'000, 7);
  double total = 0;
  for (const auto& c : configs) {
    EXPECT_EQ(c.kind(), LayerKind::kDense);
    total += static_cast<double>(c.batch_size);
  }
  EXPECT_NEAR(total / 10'000.0, 32.5, 1.0);
}

TEST(SampleSpace, EverySampleIsValid) {
  SpaceSpec spec;
  spec.kinds = {LayerKind::kDense, LayerKind::kConv2d, LayerKind::kPool};
  std::int64_t forward_only = 0;
  std::set<Activation> seen_acts;
  for (const auto& c : sample_space(spec, 100'000, 99)) {
    ASSERT_NO_THROW(validate(c)) << canonical_string(c);
    forward_only += c.forward_only() ? 1 : 0;
    seen_acts.insert(c.activation);
    if (const auto* conv = std::get_if<ConvShape>(&c.shape)) {
      ASSERT_LE(conv->in_channels, std::max<std::int64_t>(1, 10000 / conv->matrix_size));
      ASSERT_LE(conv->out_channels, std::max<std::int64_t>(1, 10000 / conv->matrix_size));
      ASSERT_LE(conv->matrix_size, 512);
      ASSERT_LE(conv->kernel, 7);
    }
    if (const auto* d = std::get_if<DenseShape>(&c.shape)) {
      ASSERT_LE(d->inputs, 4096);
      ASSERT_LE(d->outputs, 4096);
    }
  }
  EXPECT_NEAR(static_cast<double>(forward_only) / 100'000.0, 0.5, 0.01);
  EXPECT_EQ(seen_acts.count(Activation::kSoftmax), 0u);
  EXPECT_EQ(seen_acts.size(), 4u);
}

TEST(SampleSpace, DeskScaleRespectsCaps) {
  for (const auto& c : sample_space(SpaceSpec::desk_scale(), 20'000, 5)) {
    if (const auto* conv = std::get_if<ConvShape>(&c.shape)) {
      ASSERT_LE(conv->matrix_size, 64);
      ASSERT_LE(conv->in_channels, 32);
      ASSERT_LE(conv->out_channels, 32);
    } else {
      const auto& d = std::get<DenseShape>(c.shape);
      ASSERT_LE(d.inputs, 512);
      ASSERT_LE(d.outputs, 512);
    }
  }
}

TEST(SampleSpace, EncodingIsInjectiveOnSampledFields) {
  const auto hw = test_hw();
  std::set<std::string> configs;
  std::set<std::vector<double>> vectors;
  for (const auto& c : sample_space(SpaceSpec{}, 5'000, 17)) {
    const auto fv = encode(c, hw);
    check_feature_vector(fv);
    configs.insert(canonical_string(c));
    vectors.insert(fv.values);
  }
  EXPECT_EQ(configs.size(), vectors.size());
}

TEST(SampleSpace, DenseCardinality) {
  EXPECT_EQ(dense_space_cardinality(SpaceSpec{}), 1'073'741'824ull);
}

TEST(SampleSpace, InvalidSpecIsRejected) {
  SpaceSpec spec;
  spec.forward_only_probability = 1.5;
  expect_code(ErrorCode::kInvalidArgument, [&] { sample_space(spec, 1, 1); });
  spec = SpaceSpec{};
  spec.batch = {5, 4};
  expect_code(ErrorCode::kInvalidArgument, [&] { sample_space(spec, 1, 1); });
}

TEST(ConfigHash, StableAndSensitive) {
  const auto hw = test_hw();
  EXPECT_EQ(config_hash(dense(1, 2, 3), hw), config_hash(dense(1, 2, 3), hw));
  EXPECT_NE(config_hash(dense(1, 2, 3), hw), config_hash(dense(1, 3, 2), hw));
  auto other = hw;
  other.name = "other";
  EXPECT_NE(config_hash(dense(1, 2, 3), hw), config_hash(dense(1, 2, 3), other));
}

TEST(HardwareProfile, ShippedTableLoads) {
  const auto profiles =
      load_hardware_profiles(std::filesystem::path(EPOCH_ORACLE_DATA_DIR) / "hardware/table1.profile");
  ASSERT_EQ(profiles.size(), 6u);
  const auto& v100 = profiles[0];
  EXPECT_EQ(v100.name, "V100");
  EXPECT_EQ(v100.core_count, 5120);
  EXPECT_EQ(v100.clock_mhz, 1455);
  EXPECT_EQ(v100.memory_gb, 16);
  EXPECT_EQ(v100.bandwidth_gbps, 900);
  EXPECT_EQ(v100.connectivity, Connectivity::kNvlink);
  EXPECT_EQ(profiles[5].name, "K40");
  EXPECT_EQ(profiles[5].bandwidth_gbps, 288);
}

TEST(HardwareProfile, ParseFormatRoundTrip) {
  const auto hw = test_hw();
  const auto parsed = parse_hardware_profiles(format_hardware_profile(hw));
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], hw);
}

TEST(HardwareProfile, PeakDefaultsToFmaThroughput) {
  const auto parsed = parse_hardware_profiles(
      "name=x\ncores=10\nclock_mhz=1000\nmemory_gb=1\nbandwidth_gbps=1\nconnectivity=PCIe\n");
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_DOUBLE_EQ(parsed[0].peak_gflops, 20.0);
  EXPECT_EQ(parsed[0].connectivity, Connectivity::kPcie3x16);
}

TEST(HardwareProfile, Errors) {
  expect_code(ErrorCode::kParseError, [] { parse_hardware_profiles("cores=1\n"); });
  expect_code(ErrorCode::kParseError, [] { parse_hardware_profiles("name=x\nwidgets=3\n"); });
  expect_code(ErrorCode::kParseError, [] { parse_hardware_profiles("name=x\ncores=many\n"); });
  expect_code(ErrorCode::kInvalidArgument, [] { parse_hardware_profiles("name=x\ncores=1\n"); });
  expect_code(ErrorCode::kIoError, [] { load_hardware_profiles("/nonexistent/file.profile"); });
}

}  // namespace
}  // namespace epoch_oracle
