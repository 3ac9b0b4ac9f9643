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
#include <random>
#include <set>
#include <sstream>

#include "epoch_oracle/dataset.hpp"
#include "epoch_oracle/text.hpp"
#include "test_util.hpp"

namespace epoch_oracle {
namespace {

using testing::expect_code;
using testing::TempDir;

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

LayerConfig dense(std::int64_t b, std::int64_t i, std::int64_t o) {
  LayerConfig c;
  c.batch_size = b;
  c.shape = DenseShape{i, o};
  return c;
}

BenchmarkRecord record(const LayerConfig& c, double base = 1.0) {
  return make_record(c, host(), {base, base * 2, base * 3, base * 4, base * 5},
                     RecordSource::kImported);
}

std::vector<BenchmarkRecord> fuzzed_records(std::size_t n, std::uint64_t seed) {
  SpaceSpec spec;
  spec.kinds = {LayerKind::kDense, LayerKind::kConv2d, LayerKind::kPool};
  const auto configs = sample_space(spec, static_cast<std::int64_t>(n), seed);
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> time(0.0, 3.0);
  std::uniform_real_distribution<double> unit(0.1, 5000.0);
  std::vector<BenchmarkRecord> out;
  for (const auto& c : configs) {
    HardwareProfile hw = host();
    hw.name = "gpu" + std::to_string(rng() % 6);
    hw.clock_mhz = unit(rng);
    hw.memory_gb = unit(rng);
    hw.bandwidth_gbps = unit(rng);
    hw.peak_gflops = unit(rng);
    hw.core_count = static_cast<std::int64_t>(rng() % 5000) + 1;
    hw.connectivity = static_cast<Connectivity>(rng() % 4);
    out.push_back(make_record(c, hw, {time(rng), time(rng), time(rng), time(rng), time(rng)},
                              RecordSource::kImported));
  }
  return out;
}

std::string header() { return std::string(kCsvHeader) + "\n"; }

TEST(Csv, ExactHeader) {
  std::ostringstream out;
  write_csv(std::vector<BenchmarkRecord>{}, out);
  EXPECT_EQ(out.str(),
            "schema_id,op_type,batch,activation,optimizer,direction,in_dim,out_dim,matrix_size,"
            "kernel,c_in,c_out,stride,padding,has_bias,hw_name,hw_cores,hw_clock_mhz,hw_mem_gb,"
            "hw_bw_gbps,hw_peak_gflops,hw_connectivity,t1_ms,t2_ms,t3_ms,t4_ms,t5_ms,"
            "t_median_ms\n");
}

TEST(Csv, DenseRowLeavesSpatialFieldsEmpty) {
  LayerConfig c = dense(4, 10, 20);
  c.activation = Activation::kRelu;
  c.optimizer = Optimizer::kAdam;
  EXPECT_EQ(csv_row(record(c, 0.5)),
            "bench-v1,dense,4,relu,adam,forward_backward,10,20,,,,,,,1,host,1,3000,16,25,96,host,"
            "0.5,1,1.5,2,2.5,1.5");
}

TEST(Csv, RoundTripFuzzedRecordsBitExact) {
  const auto records = fuzzed_records(1000, 2024);
  TempDir dir("csv");
  write_csv(records, dir / "r.csv");
  const Dataset ds = read_csv(dir / "r.csv");
  ASSERT_EQ(ds.records.size(), records.size());
  EXPECT_EQ(ds.schema_id, kRecordSchemaId);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(ds.records[i], records[i]) << csv_row(records[i]);
  }
}

TEST(Csv, MeasuredTimesRoundTripAfterQuantization) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(1e-6, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const auto r = make_record(dense(1, 1, 1), host(), {t(rng), t(rng), t(rng), t(rng), t(rng)},
                               RecordSource::kImported);
    std::istringstream in(header() + csv_row(r) + "\n");
    EXPECT_EQ(read_csv(in).records.at(0).median_ms, r.median_ms);
  }
}

TEST(Csv, HeaderOnlyIsEmptyDataset) {
  std::istringstream in(header());
  EXPECT_TRUE(read_csv(in).records.empty());
}

TEST(Csv, MissingHeaderIsParseError) {
  std::istringstream empty("");
  expect_code(ErrorCode::kParseError, [&] { read_csv(empty); });
  std::istringstream wrong("schema_id,op_type\n");
  expect_code(ErrorCode::kParseError, [&] { read_csv(wrong); });
}

TEST(Csv, FourRunTimesNamesTheLine) {
  const std::string good = csv_row(record(dense(1, 2, 3)));
  const std::string bad = good.substr(0, good.rfind(',', good.rfind(',') - 1)) + ",3";
  std::istringstream in(header() + good + "\n" + bad + "\n");
  try {
    read_csv(in, "runs.csv");
    FAIL() << "expected parse-error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("runs.csv line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, UnknownSchemaIsVersionError) {
  std::string row = csv_row(record(dense(1, 2, 3)));
  row.replace(0, 8, "bench-v9");
  std::istringstream in(header() + row + "\n");
  expect_code(ErrorCode::kVersionError, [&] { read_csv(in); });
}

TEST(Csv, MalformedFieldsAreParseErrors) {
  const std::string good = csv_row(record(dense(1, 2, 3)));
  auto with_field = [&](std::size_t index, const std::string& value) {
    auto fields = split(good, ',');
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) row += ',';
      row += i == index ? value : std::string(fields[i]);
    }
    return header() + row + "\n";
  };
  for (const auto& text : {with_field(2, "x"), with_field(1, "lstm"), with_field(3, "swish"),
                           with_field(5, "forward_backward"), with_field(8, "7"), with_field(14, "0"),
                           with_field(21, "usb"), with_field(27, "4"), with_field(22, "-1")}) {
    std::istringstream in(text);
    expect_code(ErrorCode::kParseError, [&] { read_csv(in); });
  }
}

TEST(Csv, RecurrentRecordsCannotBeWritten) {
  BenchmarkRecord r = record(dense(1, 2, 3));
  r.config.shape = RecurrentShape{4, 4, RecurrenceType::kGru, false};
  expect_code(ErrorCode::kInvalidArgument, [&] { csv_row(r); });
}

TEST(Csv, MissingFileIsIoError) {
  expect_code(ErrorCode::kIoError, [] { read_csv(std::filesystem::path("/nonexistent/x.csv")); });
}

TEST(CsvRecordSink, AppendsAndReportsExisting) {
  TempDir dir("sink");
  const auto path = dir / "s.csv";
  const auto a = record(dense(1, 2, 3));
  const auto b = record(dense(4, 5, 6));
  {
    CsvRecordSink sink(path);
    EXPECT_TRUE(sink.existing_hashes().empty());
    sink.write(a);
  }
  {
    CsvRecordSink sink(path);
    EXPECT_EQ(sink.existing_hashes(), std::vector<std::uint64_t>{config_hash(a.config, a.hw)});
    sink.write(b);
  }
  const auto ds = read_csv(path);
  ASSERT_EQ(ds.records.size(), 2u);
  EXPECT_EQ(ds.records[0], a);
  EXPECT_EQ(ds.records[1], b);
  EXPECT_EQ(testing::read_file(path).find(std::string(kCsvHeader)), 0u);
}

TEST(Split, Sizes) {
  const auto s100 = split(100, 1);
  EXPECT_EQ(s100.train.size(), 80u);
  EXPECT_EQ(s100.test.size(), 10u);
  EXPECT_EQ(s100.validation.size(), 10u);
  const auto s10 = split(10, 1);
  EXPECT_EQ(s10.train.size(), 8u);
  EXPECT_EQ(s10.test.size(), 1u);
  EXPECT_EQ(s10.validation.size(), 1u);
  const auto s19 = split(19, 1);
  EXPECT_EQ(s19.train.size(), 15u);
  EXPECT_EQ(s19.test.size(), 1u);
  EXPECT_EQ(s19.validation.size(), 3u);
}

TEST(Split, TooSmall) {
  expect_code(ErrorCode::kInvalidArgument, [] { split(9, 1); });
  expect_code(ErrorCode::kInvalidArgument, [] { split(Dataset{}, 1); });
}

TEST(Split, DisjointAndExhaustiveFuzz) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 10 + rng() % 2000;
    const auto s = split(n, rng());
    std::vector<int> seen(n, 0);
    for (const auto* part : {&s.train, &s.test, &s.validation}) {
      for (std::size_t i : *part) {
        ASSERT_LT(i, n);
        ++seen[i];
      }
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), static_cast<std::ptrdiff_t>(n));
    EXPECT_EQ(s.train.size(), n * 8 / 10);
    EXPECT_EQ(s.test.size(), n / 10);
  }
}

TEST(Split, Deterministic) {
  const auto a = split(500, 42), b = split(500, 42), c = split(500, 43);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_NE(a.train, c.train);
}

std::size_t linear_slot() {
  for (std::size_t j = 0; j < feature_slots().size(); ++j) {
    if (feature_slots()[j].kind == SlotKind::kLinear) return j;
  }
  return 0;
}

FeatureVector with_slot(std::size_t j, double v) {
  FeatureVector f = encode(dense(1, 1, 1), host());
  f.values[j] = v;
  return f;
}

TEST(Scaler, ConstantColumnStoresUnitStd) {
  const std::size_t j = linear_slot();
  const std::vector<FeatureVector> rows{with_slot(j, 7), with_slot(j, 7), with_slot(j, 7)};
  const std::vector<double> y{1, 2, 3};
  const Scaler s = fit_scaler(rows, y);
  EXPECT_EQ(s.stddev[j], 1.0);
  EXPECT_EQ(apply_scaler(s, rows[0]).values[j], 0.0);
}

TEST(Scaler, PopulationStd) {
  const std::size_t j = linear_slot();
  const std::vector<FeatureVector> rows{with_slot(j, 0), with_slot(j, 2)};
  const std::vector<double> y{1, 1};
  const Scaler s = fit_scaler(rows, y);
  EXPECT_DOUBLE_EQ(s.mean[j], 1.0);
  EXPECT_DOUBLE_EQ(s.stddev[j], 1.0);
  EXPECT_DOUBLE_EQ(apply_scaler(s, rows[0]).values[j], -1.0);
  EXPECT_DOUBLE_EQ(apply_scaler(s, rows[1]).values[j], 1.0);
}

TEST(Scaler, LogSlotsAndTargetUseLog1p) {
  const std::size_t flops = feature_index("flops");
  ASSERT_EQ(feature_slots()[flops].kind, SlotKind::kLog);
  const std::vector<FeatureVector> rows{with_slot(flops, 0), with_slot(flops, std::exp(2.0) - 1)};
  const std::vector<double> y{0, std::exp(4.0) - 1};
  const Scaler s = fit_scaler(rows, y);
  EXPECT_NEAR(s.mean[flops], 1.0, 1e-12);
  EXPECT_NEAR(s.stddev[flops], 1.0, 1e-12);
  EXPECT_NEAR(s.target_mean, 2.0, 1e-12);
  EXPECT_NEAR(s.target_stddev, 2.0, 1e-12);
  EXPECT_NEAR(s.scale_target(0), -1.0, 1e-12);
  EXPECT_NEAR(s.unscale_target(s.scale_target(123.25)), 123.25, 1e-9);
}

TEST(Scaler, OneHotSlotsPassThrough) {
  const FeatureVector f = encode(dense(3, 4, 5), host());
  const std::vector<FeatureVector> rows{f, encode(dense(6, 7, 8), host())};
  const Scaler s = fit_scaler(rows, std::vector<double>{1, 2});
  const FeatureVector z = apply_scaler(s, f);
  EXPECT_TRUE(z.scaled);
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    const auto kind = feature_slots()[j].kind;
    if (kind == SlotKind::kOneHot || kind == SlotKind::kFlag) {
      EXPECT_EQ(z.values[j], f.values[j]);
    }
  }
}

TEST(Scaler, NotIdempotent) {
  const std::size_t j = linear_slot();
  const std::vector<FeatureVector> rows{with_slot(j, 0), with_slot(j, 4)};
  const Scaler s = fit_scaler(rows, std::vector<double>{1, 2});
  const auto once = apply_scaler(s, rows[1]);
  const auto twice = apply_scaler(s, once);
  EXPECT_NE(once.values[j], twice.values[j]);
}

TEST(Scaler, FitsOnTrainSplitOnly) {
  Dataset ds;
  for (int i = 0; i < 50; ++i) ds.records.push_back(record(dense(1 + i, 8, 8), 0.1 * (i + 1)));
  const auto s = split(ds, 11);
  const Scaler train_only = fit_scaler(ds, s.train);
  std::vector<std::size_t> train_and_test = s.train;
  train_and_test.insert(train_and_test.end(), s.test.begin(), s.test.end());
  EXPECT_NE(train_only, fit_scaler(ds, train_and_test));
  EXPECT_EQ(train_only, fit_scaler(ds, s.train));
}

TEST(Scaler, Errors) {
  expect_code(ErrorCode::kInvalidArgument,
              [] { fit_scaler(std::vector<FeatureVector>{}, std::vector<double>{}); });
  FeatureVector short_vec;
  short_vec.values = {1, 2};
  expect_code(ErrorCode::kInvalidArgument, [&] { apply_scaler(Scaler::identity(), short_vec); });
}

}  // namespace
}  // namespace epoch_oracle
