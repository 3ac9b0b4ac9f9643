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

#include <algorithm>
#include <random>
#include <sstream>

#include "epoch_oracle/composer.hpp"
#include "epoch_oracle/text.hpp"
#include "test_util.hpp"

#ifndef EPOCH_ORACLE_DATA_DIR
#error "EPOCH_ORACLE_DATA_DIR must be defined"
#endif

namespace epoch_oracle {
namespace {

using testing::expect_code;

const std::filesystem::path kNetworks = std::filesystem::path(EPOCH_ORACLE_DATA_DIR) / "networks";

HardwareProfile host() {
  HardwareProfile hw;
  hw.name = "host";
  hw.memory_gb = 16;
  hw.clock_mhz = 3000;
  hw.bandwidth_gbps = 25;
  hw.core_count = 1;
  hw.peak_gflops = 96;
  hw.connectivity = Connectivity::kHost;
  return hw;
}

NetworkDescription parse(const std::string& text) {
  std::istringstream in(text);
  return parse_network(in, "net");
}

/// Returns scripted times in layer order, cycling.
class SequenceModel final : public LayerTimeModel {
 public:
  explicit SequenceModel(std::vector<double> times) : times_(std::move(times)) {}
  bool supports(LayerKind kind) const override { return kind != LayerKind::kPool; }
  double predict_ms(const LayerConfig&, const HardwareProfile&) const override {
    return times_[next_++ % times_.size()];
  }

 private:
  std::vector<double> times_;
  mutable std::size_t next_ = 0;
};

class FlopModel final : public LayerTimeModel {
 public:
  bool supports(LayerKind) const override { return true; }
  double predict_ms(const LayerConfig& c, const HardwareProfile&) const override {
    return 1e-6 * static_cast<double>(layer_flops(c));
  }
};

const char* kTwoLayers = R"(
network two
input 8 8 3
batch 2
mode adam
conv k=3 s=1 p=same out=4 act=relu
dense out=5 act=softmax
)";

TEST(ParseNetwork, TwoLayers) {
  const auto d = parse(kTwoLayers);
  EXPECT_EQ(d.name, "two");
  EXPECT_EQ(d.layer_count(), 2u);
  EXPECT_EQ(d.batch_size, 2);
  EXPECT_EQ(d.mode, Optimizer::kAdam);
  EXPECT_EQ(std::get<ConvShape>(d.layers[0].shape), (ConvShape{8, 3, 3, 4, 1, 1, true}));
  EXPECT_EQ(std::get<DenseShape>(d.layers[1].shape), (DenseShape{8 * 8 * 4, 5}));
  EXPECT_EQ(d.layers[1].activation, Activation::kSoftmax);
}

TEST(ParseNetwork, ShippedVgg16) {
  const auto d = parse_network(kNetworks / "vgg16.net");
  EXPECT_EQ(d.input_size, 224);
  EXPECT_EQ(d.input_channels, 3);
  ASSERT_EQ(d.layer_count(), 21u);
  auto count = [&](LayerKind k) {
    return std::count_if(d.layers.begin(), d.layers.end(),
                         [&](const NetworkLayer& l) { return l.kind() == k; });
  };
  EXPECT_EQ(count(LayerKind::kConv2d), 13);
  EXPECT_EQ(count(LayerKind::kPool), 5);
  EXPECT_EQ(count(LayerKind::kDense), 3);
  EXPECT_EQ(std::get<DenseShape>(d.layers[18].shape).inputs, 7 * 7 * 512);
  EXPECT_EQ(std::get<ConvShape>(d.layers[12 + 4].shape).matrix_size, 14);
}

TEST(ParseNetwork, ShippedSmallNetwork) {
  const auto d = parse_network(kNetworks / "vgg_small.net");
  EXPECT_EQ(d.layer_count(), 10u);
  for (const auto& l : d.layers) {
    if (const auto* c = std::get_if<ConvShape>(&l.shape)) {
      EXPECT_LE(c->matrix_size, 64);
      EXPECT_LE(c->in_channels, 32);
      EXPECT_LE(c->out_channels, 32);
    } else if (const auto* dn = std::get_if<DenseShape>(&l.shape)) {
      EXPECT_LE(dn->inputs, 512);
      EXPECT_LE(dn->outputs, 512);
    }
  }
}

TEST(ParseNetwork, CommentsPoolPaddingAndFlatten) {
  const auto d = parse(R"(# comment
input 9 9 2   # trailing
maxpool k=3 s=2 p=1
dense out=3
)");
  EXPECT_EQ(std::get<PoolShape>(d.layers[0].shape), (PoolShape{9, 2, 3, 2, 1}));
  EXPECT_EQ(std::get<DenseShape>(d.layers[1].shape).inputs, 5 * 5 * 2);
  EXPECT_EQ(d.mode, Optimizer::kNone);
}

TEST(ParseNetwork, SyntaxErrorsNameTheLine) {
  for (const char* text : {"input 8 8 3\nconvolution k=3\n", "input 8 8 3\nconv k=3 s=1 out=4\n",
                           "input 8 8 3\nconv k=3 s=1 p=0 out=4 color=red\n",
                           "input 8 8 3\ndense out=x\n", "input 8 8 3\nmode turbo\n",
                           "input 8 8 3\ndense out=4 act=swish\n", "input 8 8\n",
                           "conv k=1 s=1 p=0 out=1\n", "input 8 8 3\n"}) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError) << e.what();
      EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
  }
}

TEST(ParseNetwork, ShapeChainErrorsNameTheLayer) {
  try {
    parse("input 8 8 3\nconv k=3 s=1 p=1 out=4\nconv k=3 s=1 p=1 out=4 in=5\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
  expect_code(ErrorCode::kInvalidArgument,
              [] { parse("input 2 2 1\nconv k=5 s=1 p=0 out=1\n"); });
  expect_code(ErrorCode::kInvalidArgument, [] { parse("input 4 4 1\ndense out=2 in=15\n"); });
  expect_code(ErrorCode::kInvalidArgument,
              [] { parse("input 4 4 1\ndense out=2\nconv k=1 s=1 p=0 out=1\n"); });
  expect_code(ErrorCode::kInvalidArgument, [] { parse("input 4 5 1\ndense out=2\n"); });
}

TEST(PredictNetwork, SumsStubTimes) {
  const auto d = parse(kTwoLayers);
  const SequenceModel model({2, 3});
  const auto r = predict_network(d, model, host(), 10);
  EXPECT_EQ(r.batch_time_ms, 5.0);
  EXPECT_EQ(r.epoch_time_ms, 50.0);
  EXPECT_EQ(r.layers[0].config.optimizer, Optimizer::kAdam);
  EXPECT_EQ(r.layers[0].config.batch_size, 2);
}

TEST(PredictNetwork, ConstantModelGivesLTimesC) {
  const auto d = parse_network(kNetworks / "vgg16.net");
  const SequenceModel model({0.7});
  const auto r = predict_network(d, model, host(), 3, {true});
  // Pools are unmodeled and contribute 0.
  EXPECT_DOUBLE_EQ(r.batch_time_ms, 16 * 0.7);
  EXPECT_EQ(r.epoch_time_ms, 3 * r.batch_time_ms);
  EXPECT_EQ(std::count_if(r.layers.begin(), r.layers.end(),
                          [](const LayerTime& l) { return l.unmodeled; }),
            5);
}

TEST(PredictNetwork, TotalsAreExactAndOrderInvariant) {
  std::mt19937_64 rng(4);
  const auto d = parse_network(kNetworks / "vgg16.net");
  FlopModel flops;
  const auto r = predict_network(d, flops, host(), 7);
  std::vector<double> col;
  for (const auto& l : r.layers) col.push_back(l.time_ms);
  EXPECT_EQ(r.batch_time_ms, exact_sum(col));
  std::reverse(col.begin(), col.end());
  EXPECT_EQ(r.batch_time_ms, exact_sum(col));

  NetworkDescription shuffled = d;
  std::shuffle(shuffled.layers.begin(), shuffled.layers.end(), rng);
  EXPECT_EQ(predict_network(shuffled, flops, host(), 7).batch_time_ms, r.batch_time_ms);
}

TEST(PredictNetwork, UnsupportedLayer) {
  const auto d = parse_network(kNetworks / "vgg16.net");
  const SequenceModel model({1});
  try {
    predict_network(d, model, host(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedLayer);
    EXPECT_NE(std::string(e.what()).find("pool"), std::string::npos);
  }
  expect_code(ErrorCode::kInvalidArgument, [&] { predict_network(d, model, host(), 0, {true}); });
}

TEST(CompareModes, ShapeAndModeMapping) {
  const auto d = parse(kTwoLayers);
  FlopModel flops;
  const auto rows = compare_modes(d, flops, host());
  ASSERT_EQ(rows.size(), 7u * 2u);
  EXPECT_EQ(rows[0].batch_size, 1);
  EXPECT_EQ(rows.back().batch_size, 64);

  class ModeProbe final : public LayerTimeModel {
   public:
    bool supports(LayerKind) const override { return true; }
    double predict_ms(const LayerConfig& c, const HardwareProfile&) const override {
      return c.optimizer == Optimizer::kNone ? 1 : c.optimizer == Optimizer::kAdam ? 3 : 2;
    }
  } probe;
  for (const auto& r : compare_modes(d, probe, host())) {
    EXPECT_EQ(r.forward_ms, 1);
    EXPECT_EQ(r.sgd_ms, 2);
    EXPECT_EQ(r.adam_ms, 3);
  }
}

TEST(CompareModes, ConvGrowsFasterWithBatchThanDenseUnderFlopStub) {
  // A FLOP-proportional stub scales every layer by the same ratio, so compare
  // the absolute growth from batch 1 to 64.
  const auto d = parse_network(kNetworks / "vgg_small.net");
  FlopModel flops;
  const auto rows = compare_modes(d, flops, host(), {1, 64});
  const std::size_t l = d.layer_count();
  double conv_growth = 0, dense_growth = 0;
  for (std::size_t i = 0; i < l; ++i) {
    const double g = rows[l + i].forward_ms - rows[i].forward_ms;
    if (rows[i].kind == LayerKind::kConv2d) conv_growth = std::max(conv_growth, g);
    if (rows[i].kind == LayerKind::kDense) dense_growth = std::max(dense_growth, g);
  }
  EXPECT_GT(conv_growth, dense_growth);
}

TEST(MeasureNetwork, ScriptedClock) {
  const auto d = parse(kTwoLayers);
  ScriptedClock clock({1, 2, 3, 4, 5, 10, 10, 10, 10, 10});
  const auto r = measure_network(d, host(), clock, 4);
  EXPECT_EQ(r.layers[0].time_ms, 3);
  EXPECT_EQ(r.layers[1].time_ms, 10);
  EXPECT_EQ(r.batch_time_ms, 13);
  EXPECT_EQ(r.epoch_time_ms, 52);
}

TEST(MeasureNetwork, RealClockGivesPositiveTimes) {
  const auto d = parse_network(kNetworks / "vgg_small.net");
  SteadyClock clock;
  const auto r = measure_network(d, host(), clock, 1);
  std::vector<double> col;
  for (const auto& l : r.layers) {
    EXPECT_GT(l.time_ms, 0);
    col.push_back(l.time_ms);
  }
  EXPECT_EQ(r.batch_time_ms, exact_sum(col));
}

TEST(ReportCsv, ColumnsAndTotals) {
  const auto d = parse(kTwoLayers);
  const SequenceModel model({2, 3});
  const auto p = predict_network(d, model, host(), 1);
  std::ostringstream out;
  write_report_csv(out, p);
  EXPECT_EQ(out.str(),
            "layer_index,kind,mode,batch,predicted_ms\n"
            "0,conv2d,adam,2,2\n"
            "1,dense,adam,2,3\n"
            "total,,adam,2,5\n");
  std::ostringstream both;
  write_report_csv(both, p, &p);
  EXPECT_EQ(both.str().substr(0, both.str().find('\n')),
            "layer_index,kind,mode,batch,predicted_ms,measured_ms");
  EXPECT_NE(both.str().find("total,,adam,2,5,5\n"), std::string::npos);
}

}  // namespace
}  // namespace epoch_oracle
