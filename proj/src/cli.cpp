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

#include "epoch_oracle/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "epoch_oracle/bench.hpp"
#include "epoch_oracle/composer.hpp"
#include "epoch_oracle/dataset.hpp"
#include "epoch_oracle/error.hpp"
#include "epoch_oracle/hardware.hpp"
#include "epoch_oracle/linear_model.hpp"
#include "epoch_oracle/predictor.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle::cli {
namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("EPOCH_ORACLE_SEED");
  if (!env || !*env) return 0;
  const auto v = try_parse_int(env);
  require(v.has_value() && *v >= 0, "EPOCH_ORACLE_SEED must be a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot open " + path + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorCode::kIoError, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// Shared option groups.

struct SpaceOptions {
  std::string op = "both";
  std::string scale = "desk";
  std::int64_t batch_max = 0;
  std::int64_t dense_max = 0;
  std::int64_t matrix_max = 0;
  std::int64_t channel_max = 0;

  void add(CLI::App* app) {
    app->add_option("--op", op, "Layer kinds to sample")
        ->check(CLI::IsMember({"dense", "conv", "pool", "both"}));
    app->add_option("--scale", scale, "Sampling ranges: desk (CPU-sized) or full")
        ->check(CLI::IsMember({"desk", "full"}));
    app->add_option("--batch-max", batch_max, "Override the largest batch size");
    app->add_option("--dense-max", dense_max, "Override the largest dense dimension");
    app->add_option("--matrix-max", matrix_max, "Override the largest conv/pool matrix size");
    app->add_option("--channel-max", channel_max, "Cap conv and pool channel counts");
  }

  SpaceSpec spec() const {
    SpaceSpec s = scale == "desk" ? SpaceSpec::desk_scale() : SpaceSpec{};
    if (op == "dense") s.kinds = {LayerKind::kDense};
    if (op == "conv") s.kinds = {LayerKind::kConv2d};
    if (op == "pool") s.kinds = {LayerKind::kPool};
    if (batch_max) s.batch.hi = batch_max;
    if (dense_max) s.dense_dim.hi = dense_max;
    if (matrix_max) s.matrix_size.hi = matrix_max;
    if (channel_max) {
      s.channel_cap = channel_max;
      s.pool_channels.hi = std::min(s.pool_channels.hi, channel_max);
    }
    s.validate();
    return s;
  }
};

struct HardwareOptions {
  std::string path;
  std::string name;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--hw", path, "Hardware profile file");
    if (required) opt->required();
    app->add_option("--hw-name", name, "Profile to use from a multi-profile file");
  }

  HardwareProfile load() const { return load_hardware_profile(path, name); }
};

struct DataOptions {
  std::vector<std::string> paths;
  std::string only_hw;
  std::string exclude_hw;
  std::uint64_t split_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--data", paths, "Benchmark CSV file(s)")->required();
    app->add_option("--only-hw", only_hw, "Keep only records from this hardware profile");
    app->add_option("--exclude-hw", exclude_hw, "Drop records from this hardware profile");
    app->add_option("--split-seed", split_seed, "Seed of the 80/10/10 split");
  }

  Dataset load(std::ostream& err) const {
    Dataset ds;
    for (const auto& p : paths) {
      auto part = read_csv(std::filesystem::path(p));
      ds.records.insert(ds.records.end(), part.records.begin(), part.records.end());
    }
    const auto before = ds.records.size();
    std::erase_if(ds.records, [&](const BenchmarkRecord& r) {
      return (!only_hw.empty() && r.hw.name != only_hw) ||
             (!exclude_hw.empty() && r.hw.name == exclude_hw);
    });
    if (ds.records.size() != before) {
      err << "using " << ds.records.size() << " of " << before << " records\n";
    }
    return ds;
  }
};

struct TrainOptions {
  std::vector<std::int64_t> hidden;
  TrainConfig cfg;
  double dropout = 0.2;
  double l2 = 1e-5;

  void add(CLI::App* app) {
    app->add_option("--hidden", hidden, "Hidden layer widths, e.g. 256,128,64,32")
        ->delimiter(',');
    app->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "Initial Adam learning rate")
        ->capture_default_str();
    app->add_option("--decay-every", cfg.decay_every, "Epochs between learning-rate cuts")
        ->capture_default_str();
    app->add_option("--decay-factor", cfg.decay_factor, "Learning-rate divisor at each cut")
        ->capture_default_str();
    app->add_option("--l2", l2, "L2 penalty on weights")->capture_default_str();
    app->add_option("--dropout", dropout, "Dropout after the final hidden layer")
        ->capture_default_str();
    app->add_option("--seed", cfg.seed, "Initialisation and shuffling seed");
  }

  MlpArchitecture arch() const {
    MlpArchitecture a = hidden.empty() ? MlpArchitecture::pyramid(4) : MlpArchitecture{};
    if (!hidden.empty()) a.hidden = hidden;
    a.dropout_rate = dropout;
    a.l2_lambda = l2;
    return a;
  }
};

std::string join(const std::vector<std::int64_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return s;
}

void print_metrics_header(std::ostream& out) {
  out << std::left << std::setw(14) << "split" << std::right << std::setw(8) << "n"
      << std::setw(14) << "rmse_ms" << std::setw(12) << "rmsle" << '\n';
}

void print_metrics(std::ostream& out, const std::string& label, const Metrics& m) {
  out << std::left << std::setw(14) << label << std::right << std::setw(8) << m.count
      << std::setw(14) << fixed(m.rmse_ms) << std::setw(12) << fixed(m.rmsle) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands.

struct SampleCommand {
  SpaceOptions space;
  std::int64_t count = 10;
  std::uint64_t seed = 0;

  int run(std::ostream& out) const {
    for (const auto& c : sample_space(space.spec(), count, seed)) out << canonical_string(c) << '\n';
    return kExitOk;
  }
};

struct BenchCommand {
  SpaceOptions space;
  HardwareOptions hw;
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  double max_gib = 2.0;

  int run(std::ostream& out, std::ostream& err) const {
    const HardwareProfile profile = hw.load();
    CsvRecordSink sink(out_path);
    SteadyClock clock;
    BenchOptions options;
    options.max_bytes = static_cast<std::size_t>(max_gib * 1024 * 1024 * 1024);
    const auto written = run_campaign(space.spec(), count, seed, profile, clock, sink, &err, options);
    out << "wrote " << written << " records to " << out_path << " ("
        << (count - written) << " already present)\n";
    return kExitOk;
  }
};

struct TrainCommand {
  DataOptions data;
  TrainOptions train_opts;
  std::string model_path;
  std::string curve_path;

  int run(std::ostream& out, std::ostream& err) const {
    const Dataset ds = data.load(err);
    const SplitIndices splits = split(ds, data.split_seed);
    const auto result = train(ds, splits, train_opts.arch(), train_opts.cfg);
    save_model(result.predictor, model_path);
    if (!curve_path.empty()) {
      auto f = open_output(curve_path);
      f << "epoch,learning_rate,train_loss,test_rmsle\n";
      for (const auto& row : result.loss_curve) {
        f << row.epoch << ',' << format_real(row.learning_rate) << ','
          << format_real(row.train_loss) << ',' << format_real(row.test_rmsle) << '\n';
      }
      finish_output(f, curve_path);
    }
    out << "trained " << join(result.predictor.arch.hidden, '/') << " on "
        << splits.train.size() << " records for " << train_opts.cfg.epochs << " epochs\n";
    print_metrics_header(out);
    print_metrics(out, "test", evaluate(result.predictor, ds, splits.test));
    print_metrics(out, "validation", evaluate(result.predictor, ds, splits.validation));
    out << "model written to " << model_path << '\n';
    return kExitOk;
  }
};

struct EvalCommand {
  DataOptions data;
  std::string model_path;
  std::string scatter_path;
  bool baseline = false;

  int run(std::ostream& out, std::ostream& err) const {
    const MlpPredictor model = load_model(std::filesystem::path(model_path));
    const Dataset ds = data.load(err);
    const SplitIndices splits = split(ds, data.split_seed);
    std::vector<std::size_t> all(ds.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    print_metrics_header(out);
    print_metrics(out, "test", evaluate(model, ds, splits.test));
    print_metrics(out, "validation", evaluate(model, ds, splits.validation));
    print_metrics(out, "all", evaluate(model, ds, all));

    std::optional<LinearModel> linear;
    if (baseline) {
      linear = fit_linear(ds, splits, true);
      std::vector<double> pred, actual;
      for (std::size_t i : splits.test) {
        const auto& r = ds.records[i];
        pred.push_back(predict_linear(*linear, r.config, r.hw));
        actual.push_back(r.median_ms);
      }
      out << std::left << std::setw(14) << "linear+flops" << std::right << std::setw(8)
          << pred.size() << std::setw(14) << fixed(loss_rmse(pred, actual)) << '\n';
    }

    if (!scatter_path.empty()) {
      auto f = open_output(scatter_path);
      f << "split,index,hw_name,op_type,actual_ms,predicted_ms" << (linear ? ",linear_ms" : "")
        << '\n';
      auto emit = [&](const char* label, const std::vector<std::size_t>& idx) {
        for (std::size_t i : idx) {
          const auto& r = ds.records[i];
          f << label << ',' << i << ',' << r.hw.name << ',' << to_string(r.config.kind()) << ','
            << format_real(r.median_ms) << ','
            << format_real(predict_time_ms(model, r.config, r.hw));
          if (linear) f << ',' << format_real(predict_linear(*linear, r.config, r.hw));
          f << '\n';
        }
      };
      emit("train", splits.train);
      emit("test", splits.test);
      emit("validation", splits.validation);
      finish_output(f, scatter_path);
    }
    return kExitOk;
  }
};

struct PredictCommand {
  std::string model_path;
  HardwareOptions hw;
  std::string op = "dense";
  std::int64_t batch = 1;
  std::string activation = "none";
  std::string optimizer = "forward";
  std::int64_t inputs = 0, outputs = 0, matrix = 0, kernel = 0, stride = 1, padding = 0;
  std::int64_t c_in = 0, c_out = 0;
  bool no_bias = false;

  int run(std::ostream& out) const {
    const MlpPredictor model = load_model(std::filesystem::path(model_path));
    const HardwareProfile profile = hw.load();
    LayerConfig c;
    c.batch_size = batch;
    c.activation = parse_activation(activation);
    c.optimizer = parse_optimizer(optimizer);
    const LayerKind kind = parse_layer_kind(op);
    if (kind == LayerKind::kDense) {
      c.shape = DenseShape{inputs, outputs};
    } else if (kind == LayerKind::kConv2d) {
      c.shape = ConvShape{matrix, kernel, c_in, c_out, stride, padding, !no_bias};
    } else if (kind == LayerKind::kPool) {
      c.shape = PoolShape{matrix, c_in, kernel, stride, padding};
    } else {
      fail(ErrorCode::kUnsupportedLayer, "predict supports dense, conv2d and pool layers");
    }
    validate(c);
    if (!model.models(kind)) {
      fail(ErrorCode::kUnsupportedLayer,
           "the model was not trained on " + std::string(to_string(kind)) + " layers");
    }
    out << canonical_string(c) << '\n'
        << "predicted_ms " << format_real(predict_time_ms(model, c, profile), 6) << '\n';
    return kExitOk;
  }
};

struct ComposeCommand {
  std::string net_path;
  std::string model_path;
  HardwareOptions hw;
  std::int64_t batches = 1;
  std::int64_t batch_override = 0;
  std::string mode_override;
  bool measure = false;
  bool allow_unmodeled = false;
  std::string out_path;
  std::string modes_path;

  int run(std::ostream& out, std::ostream& err) const {
    NetworkDescription desc = parse_network(std::filesystem::path(net_path));
    if (batch_override) desc.batch_size = batch_override;
    if (!mode_override.empty()) desc.mode = parse_optimizer(mode_override);
    const MlpPredictor predictor = load_model(std::filesystem::path(model_path));
    const MlpTimeModel model(predictor);
    const HardwareProfile profile = hw.load();
    const ComposeOptions options{allow_unmodeled};

    const auto predicted = predict_network(desc, model, profile, batches, options);
    std::optional<PredictionReport> measured;
    if (measure) {
      err << "measuring " << desc.layer_count() << " layers on the host\n";
      SteadyClock clock;
      measured = measure_network(desc, profile, clock, batches);
    }

    const std::string mode(desc.mode == Optimizer::kNone ? "forward" : to_string(desc.mode));
    out << "network " << desc.name << " on " << profile.name << ", batch " << desc.batch_size
        << ", mode " << mode << '\n';
    out << std::right << std::setw(5) << "layer" << "  " << std::left << std::setw(8) << "kind"
        << std::right << std::setw(14) << "predicted_ms";
    if (measured) out << std::setw(14) << "measured_ms";
    out << "  config\n";
    for (std::size_t i = 0; i < predicted.layers.size(); ++i) {
      const auto& l = predicted.layers[i];
      out << std::right << std::setw(5) << i << "  " << std::left << std::setw(8)
          << to_string(l.config.kind()) << std::right << std::setw(14)
          << (l.unmodeled ? std::string("unmodeled") : fixed(l.time_ms));
      if (measured) out << std::setw(14) << fixed(measured->layers[i].time_ms);
      out << "  " << canonical_string(l.config) << '\n';
    }
    out << "T_b " << format_real(predicted.batch_time_ms, 6) << " ms";
    if (measured) out << " (measured " << format_real(measured->batch_time_ms, 6) << " ms)";
    out << '\n'
        << "E = " << predicted.batches << " x T_b = " << format_real(predicted.epoch_time_ms, 6)
        << " ms";
    if (measured) out << " (measured " << format_real(measured->epoch_time_ms, 6) << " ms)";
    out << '\n';

    if (!out_path.empty()) {
      auto f = open_output(out_path);
      write_report_csv(f, predicted, measured ? &*measured : nullptr);
      finish_output(f, out_path);
    }
    if (!modes_path.empty()) {
      auto f = open_output(modes_path);
      write_modes_csv(f, compare_modes(desc, model, profile, {1, 2, 4, 8, 16, 32, 64}, options));
      finish_output(f, modes_path);
    }
    return kExitOk;
  }
};

struct SweepCommand {
  DataOptions data;
  TrainOptions train_opts;
  std::vector<std::int64_t> depths{1, 2, 3, 4, 5, 6, 7};
  std::string out_path;
  std::string model_prefix;

  int run(std::ostream& out, std::ostream& err) const {
    const Dataset ds = data.load(err);
    const SplitIndices splits = split(ds, data.split_seed);
    const auto results = sweep_depth(ds, splits, depths, train_opts.arch(), train_opts.cfg);
    std::ostringstream csv;
    csv << "depth,hidden,test_rmse_ms,test_rmsle,validation_rmse_ms,validation_rmsle\n";
    out << std::right << std::setw(5) << "depth" << std::setw(14) << "test_rmse_ms"
        << std::setw(12) << "test_rmsle" << "  hidden\n";
    for (const auto& r : results) {
      csv << r.depth << ',' << join(r.hidden, '/') << ',' << format_real(r.test.rmse_ms) << ','
          << format_real(r.test.rmsle) << ',' << format_real(r.validation.rmse_ms) << ','
          << format_real(r.validation.rmsle) << '\n';
      out << std::setw(5) << r.depth << std::setw(14) << fixed(r.test.rmse_ms) << std::setw(12)
          << fixed(r.test.rmsle) << "  " << join(r.hidden, '/') << '\n';
      if (!model_prefix.empty()) {
        save_model(r.predictor, model_prefix + std::to_string(r.depth) + ".model");
      }
    }
    if (!out_path.empty()) {
      auto f = open_output(out_path);
      f << csv.str();
      finish_output(f, out_path);
    }
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::uint64_t seed;
  try {
    seed = default_seed();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Predicts deep-learning layer and network execution times.", "epoch-oracle"};
  app.require_subcommand(1);

  SampleCommand sample;
  sample.seed = seed;
  auto* sample_cmd = app.add_subcommand("sample", "Print sampled layer configurations");
  sample.space.add(sample_cmd);
  sample_cmd->add_option("--count", sample.count, "Number of configurations")
      ->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "Sampling seed");

  BenchCommand bench;
  bench.seed = seed;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark random layer configurations");
  bench.space.add(bench_cmd);
  bench.hw.add(bench_cmd, true);
  bench_cmd->add_option("--count", bench.count, "Number of configurations")->required();
  bench_cmd->add_option("--seed", bench.seed, "Sampling seed");
  bench_cmd->add_option("--out", bench.out_path, "CSV to create or resume")->required();
  bench_cmd->add_option("--max-gib", bench.max_gib, "Tensor memory limit per layer")
      ->capture_default_str();

  TrainCommand train_c;
  train_c.data.split_seed = seed;
  train_c.train_opts.cfg.seed = seed;
  auto* train_cmd = app.add_subcommand("train", "Train the execution-time predictor");
  train_c.data.add(train_cmd);
  train_c.train_opts.add(train_cmd);
  train_cmd->add_option("--model", train_c.model_path, "Model file to write")->required();
  train_cmd->add_option("--loss-curve", train_c.curve_path, "Per-epoch loss CSV to write");

  EvalCommand eval;
  eval.data.split_seed = seed;
  auto* eval_cmd = app.add_subcommand("eval", "Report RMSE and RMSLE of a model");
  eval.data.add(eval_cmd);
  eval_cmd->add_option("--model", eval.model_path, "Model file")->required();
  eval_cmd->add_option("--scatter", eval.scatter_path, "Predicted-vs-actual CSV to write");
  eval_cmd->add_flag("--baseline", eval.baseline, "Also fit the linear+flops baseline");

  PredictCommand predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the time of one layer");
  predict_cmd->add_option("--model", predict.model_path, "Model file")->required();
  predict.hw.add(predict_cmd, true);
  predict_cmd->add_option("--op", predict.op, "dense, conv2d or pool")->capture_default_str();
  predict_cmd->add_option("--batch", predict.batch, "Batch size")->capture_default_str();
  predict_cmd->add_option("--act", predict.activation, "Activation")->capture_default_str();
  predict_cmd->add_option("--opt", predict.optimizer, "Optimizer, or forward")
      ->capture_default_str();
  predict_cmd->add_option("--in", predict.inputs, "Dense inputs");
  predict_cmd->add_option("--out", predict.outputs, "Dense outputs");
  predict_cmd->add_option("--matrix", predict.matrix, "Conv/pool matrix size");
  predict_cmd->add_option("--kernel", predict.kernel, "Conv/pool kernel size");
  predict_cmd->add_option("--stride", predict.stride, "Conv/pool stride")->capture_default_str();
  predict_cmd->add_option("--padding", predict.padding, "Conv/pool padding")
      ->capture_default_str();
  predict_cmd->add_option("--c-in", predict.c_in, "Input channels");
  predict_cmd->add_option("--c-out", predict.c_out, "Conv output channels");
  predict_cmd->add_flag("--no-bias", predict.no_bias, "Conv layer without bias");

  ComposeCommand compose;
  auto* compose_cmd = app.add_subcommand("compose", "Predict batch and epoch time of a network");
  compose_cmd->add_option("--net", compose.net_path, "Network description")->required();
  compose_cmd->add_option("--model", compose.model_path, "Model file")->required();
  compose.hw.add(compose_cmd, true);
  compose_cmd->add_option("--batches", compose.batches, "Batches per epoch")
      ->capture_default_str();
  compose_cmd->add_option("--batch", compose.batch_override, "Override the network batch size");
  compose_cmd->add_option("--mode", compose.mode_override, "Override the training mode");
  compose_cmd->add_flag("--measure", compose.measure, "Also time every layer on the host");
  compose_cmd->add_flag("--allow-unmodeled", compose.allow_unmodeled,
                        "Predict layers the model lacks as 0 instead of failing");
  compose_cmd->add_option("--out", compose.out_path, "Report CSV to write");
  compose_cmd->add_option("--modes", compose.modes_path,
                          "Forward/SGD/Adam comparison CSV to write");

  SweepCommand sweep;
  sweep.data.split_seed = seed;
  sweep.train_opts.cfg.seed = seed;
  auto* sweep_cmd = app.add_subcommand("sweep-depth", "Train one model per hidden-layer count");
  sweep.data.add(sweep_cmd);
  sweep.train_opts.add(sweep_cmd);
  sweep_cmd->add_option("--depths", sweep.depths, "Hidden-layer counts")->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out_path, "Depth-vs-RMSE CSV to write");
  sweep_cmd->add_option("--model-prefix", sweep.model_prefix,
                        "Save each model as <prefix><depth>.model");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) {
      err << app.get_subcommands().front()->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }

  try {
    if (sample_cmd->parsed()) return sample.run(out);
    if (bench_cmd->parsed()) return bench.run(out, err);
    if (train_cmd->parsed()) return train_c.run(out, err);
    if (eval_cmd->parsed()) return eval.run(out, err);
    if (predict_cmd->parsed()) return predict.run(out);
    if (compose_cmd->parsed()) return compose.run(out, err);
    if (sweep_cmd->parsed()) return sweep.run(out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace epoch_oracle::cli
