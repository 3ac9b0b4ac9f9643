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

#include "epoch_oracle/composer.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/shape.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle {
namespace {

class NetworkParser {
 public:
  explicit NetworkParser(std::string_view source) : source_(source) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kParseError,
         std::string(source_) + " line " + std::to_string(line_) + ": " + what);
  }

  [[noreturn]] void chain_error(const std::string& what) const {
    fail(ErrorCode::kInvalidArgument, std::string(source_) + " line " + std::to_string(line_) +
                                          ": layer " + std::to_string(desc_.layers.size()) +
                                          ": " + what);
  }

  void parse_line(std::string_view raw, std::size_t line_no) {
    line_ = line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::vector<std::string_view> words;
    for (auto w : split(trim(raw), ' ')) {
      w = trim(w);
      if (!w.empty()) words.push_back(w);
    }
    if (words.empty()) return;
    const std::string_view directive = words[0];
    words.erase(words.begin());
    if (directive == "network") {
      if (words.size() != 1) error("network takes one name");
      desc_.name = std::string(words[0]);
    } else if (directive == "input") {
      if (words.size() != 3) error("input takes H W C");
      if (!desc_.layers.empty()) error("input must come before the layers");
      const auto h = positive(words[0]), w = positive(words[1]), c = positive(words[2]);
      if (h != w) {
        fail(ErrorCode::kInvalidArgument, std::string(source_) + " line " +
                                              std::to_string(line_) + ": only square inputs are "
                                                                      "supported");
      }
      desc_.input_size = h;
      desc_.input_channels = c;
      size_ = h;
      channels_ = c;
      flat_ = 0;
    } else if (directive == "batch") {
      if (words.size() != 1) error("batch takes one value");
      desc_.batch_size = positive(words[0]);
    } else if (directive == "mode") {
      if (words.size() != 1) error("mode takes one value");
      try {
        desc_.mode = parse_optimizer(words[0]);
      } catch (const Error& e) {
        error(e.what());
      }
    } else if (directive == "conv" || directive == "maxpool" || directive == "dense") {
      if (size_ == 0 && flat_ == 0) error("'input' must come before the first layer");
      add_layer(directive, words);
    } else {
      error("unknown directive '" + std::string(directive) + "'");
    }
  }

  NetworkDescription finish() {
    if (desc_.input_size == 0) error("missing 'input'");
    if (desc_.layers.empty()) error("network has no layers");
    if (desc_.name.empty()) desc_.name = "network";
    return std::move(desc_);
  }

 private:
  using Args = std::map<std::string_view, std::string_view>;

  std::int64_t integer(std::string_view text) const {
    const auto v = try_parse_int(text);
    if (!v) error("bad integer '" + std::string(text) + "'");
    return *v;
  }

  std::int64_t positive(std::string_view text) const {
    const auto v = integer(text);
    if (v < 1) error("value must be >= 1, got " + std::string(text));
    return v;
  }

  Args arguments(const std::vector<std::string_view>& words,
                 std::initializer_list<std::string_view> allowed,
                 std::initializer_list<std::string_view> required) const {
    Args args;
    for (auto w : words) {
      const auto eq = w.find('=');
      if (eq == std::string_view::npos) error("expected key=value, got '" + std::string(w) + "'");
      const auto key = w.substr(0, eq);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error("unknown key '" + std::string(key) + "'");
      }
      if (!args.emplace(key, w.substr(eq + 1)).second) {
        error("duplicate key '" + std::string(key) + "'");
      }
    }
    for (auto key : required) {
      if (!args.count(key)) error("missing " + std::string(key) + "=");
    }
    return args;
  }

  Activation activation(const Args& args) const {
    const auto it = args.find("act");
    if (it == args.end()) return Activation::kNone;
    try {
      return parse_activation(it->second);
    } catch (const Error& e) {
      error(e.what());
    }
  }

  std::int64_t out_dim(std::int64_t size, std::int64_t k, std::int64_t s, std::int64_t p) const {
    try {
      return output_dim(size, k, s, p);
    } catch (const Error& e) {
      chain_error(e.what());
    }
  }

  void add_layer(std::string_view directive, const std::vector<std::string_view>& words) {
    NetworkLayer layer;
    layer.line = line_;
    if (directive == "dense") {
      const auto args = arguments(words, {"out", "act", "in"}, {"out"});
      const std::int64_t inputs = flat_ ? flat_ : size_ * size_ * channels_;
      if (args.count("in") && integer(args.at("in")) != inputs) {
        chain_error("declared in=" + std::string(args.at("in")) + " but the previous layer gives " +
                    std::to_string(inputs));
      }
      const auto outputs = positive(args.at("out"));
      layer.shape = DenseShape{inputs, outputs};
      layer.activation = activation(args);
      flat_ = outputs;
      size_ = channels_ = 0;
    } else {
      if (flat_) chain_error(std::string(directive) + " cannot follow a dense layer");
      const bool conv = directive == "conv";
      const auto args = conv ? arguments(words, {"k", "s", "p", "out", "act", "bias", "in"},
                                         {"k", "s", "p", "out"})
                             : arguments(words, {"k", "s", "p"}, {"k", "s"});
      const auto k = positive(args.at("k"));
      const auto s = positive(args.at("s"));
      std::int64_t p = 0;
      if (const auto it = args.find("p"); it != args.end()) {
        p = it->second == "same" ? (k - 1) / 2 : integer(it->second);
        if (p < 0) error("padding must be >= 0");
      }
      const auto next = out_dim(size_, k, s, p);
      if (conv) {
        if (args.count("in") && integer(args.at("in")) != channels_) {
          chain_error("declared in=" + std::string(args.at("in")) +
                      " but the previous layer gives " + std::to_string(channels_) + " channels");
        }
        bool bias = true;
        if (const auto it = args.find("bias"); it != args.end()) {
          if (it->second != "0" && it->second != "1") error("bias must be 0 or 1");
          bias = it->second == "1";
        }
        const auto out = positive(args.at("out"));
        layer.shape = ConvShape{size_, k, channels_, out, s, p, bias};
        layer.activation = activation(args);
        channels_ = out;
      } else {
        if (p >= k) chain_error("pool padding must be smaller than the kernel");
        layer.shape = PoolShape{size_, channels_, k, s, p};
      }
      size_ = next;
    }
    desc_.layers.push_back(std::move(layer));
  }

  std::string_view source_;
  std::size_t line_ = 0;
  NetworkDescription desc_;
  std::int64_t size_ = 0;
  std::int64_t channels_ = 0;
  std::int64_t flat_ = 0;
};

std::string_view mode_name(Optimizer mode) {
  return mode == Optimizer::kNone ? "forward" : to_string(mode);
}

double total_ms(const std::vector<LayerTime>& layers) {
  std::vector<double> times;
  times.reserve(layers.size());
  for (const auto& l : layers) times.push_back(l.time_ms);
  return exact_sum(times);
}

PredictionReport empty_report(const NetworkDescription& desc, const HardwareProfile& hw,
                              std::int64_t batches) {
  require(batches >= 1, "batch count must be >= 1");
  PredictionReport r;
  r.network = desc.name;
  r.hw_name = hw.name;
  r.mode = desc.mode;
  r.batch_size = desc.batch_size;
  r.batches = batches;
  return r;
}

void finish_report(PredictionReport& r) {
  r.batch_time_ms = total_ms(r.layers);
  r.epoch_time_ms = static_cast<double>(r.batches) * r.batch_time_ms;
}

LayerTime predict_layer(const NetworkDescription& desc, std::size_t index, std::int64_t batch,
                        Optimizer mode, const LayerTimeModel& model, const HardwareProfile& hw,
                        const ComposeOptions& options) {
  LayerTime t;
  t.index = index;
  t.config = layer_config(desc, index, batch, mode);
  const LayerKind kind = t.config.kind();
  if (!model.supports(kind)) {
    if (!options.allow_unmodeled) {
      fail(ErrorCode::kUnsupportedLayer, "layer " + std::to_string(index) + ": no model for " +
                                             std::string(to_string(kind)) + " layers");
    }
    t.unmodeled = true;
    return t;
  }
  t.time_ms = model.predict_ms(t.config, hw);
  return t;
}

}  // namespace

LayerKind NetworkLayer::kind() const {
  LayerConfig c;
  c.shape = shape;
  return c.kind();
}

NetworkDescription parse_network(std::istream& in, std::string_view source_name) {
  NetworkParser parser(source_name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    parser.parse_line(line, ++line_no);
  }
  return parser.finish();
}

NetworkDescription parse_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_network(in, path.string());
}

LayerConfig layer_config(const NetworkDescription& desc, std::size_t index,
                         std::int64_t batch_size, Optimizer mode) {
  require(index < desc.layers.size(), "layer index out of range");
  LayerConfig c;
  c.batch_size = batch_size;
  c.optimizer = mode;
  c.activation = desc.layers[index].activation;
  c.shape = desc.layers[index].shape;
  validate(c);
  return c;
}

PredictionReport predict_network(const NetworkDescription& desc, const LayerTimeModel& model,
                                 const HardwareProfile& hw, std::int64_t batches,
                                 const ComposeOptions& options) {
  PredictionReport r = empty_report(desc, hw, batches);
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    r.layers.push_back(predict_layer(desc, i, desc.batch_size, desc.mode, model, hw, options));
  }
  finish_report(r);
  return r;
}

PredictionReport measure_network(const NetworkDescription& desc, const HardwareProfile& hw,
                                 Clock& clock, std::int64_t batches,
                                 const BenchOptions& options) {
  PredictionReport r = empty_report(desc, hw, batches);
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    LayerTime t;
    t.index = i;
    t.config = layer_config(desc, i, desc.batch_size, desc.mode);
    t.time_ms = run_benchmark(t.config, hw, clock, options).median_ms;
    r.layers.push_back(std::move(t));
  }
  finish_report(r);
  return r;
}

std::vector<ModeRow> compare_modes(const NetworkDescription& desc, const LayerTimeModel& model,
                                   const HardwareProfile& hw,
                                   const std::vector<std::int64_t>& batch_sizes,
                                   const ComposeOptions& options) {
  std::vector<ModeRow> rows;
  for (std::int64_t batch : batch_sizes) {
    for (std::size_t i = 0; i < desc.layers.size(); ++i) {
      const auto fwd = predict_layer(desc, i, batch, Optimizer::kNone, model, hw, options);
      const auto sgd =
          predict_layer(desc, i, batch, Optimizer::kGradientDescent, model, hw, options);
      const auto adam = predict_layer(desc, i, batch, Optimizer::kAdam, model, hw, options);
      rows.push_back({i, fwd.config.kind(), batch, fwd.time_ms, sgd.time_ms, adam.time_ms,
                      fwd.unmodeled});
    }
  }
  return rows;
}

void write_report_csv(std::ostream& out, const PredictionReport& predicted,
                      const PredictionReport* measured) {
  if (measured) {
    require(measured->layers.size() == predicted.layers.size(),
            "measured report has a different layer count");
  }
  out << "layer_index,kind,mode,batch,predicted_ms" << (measured ? ",measured_ms" : "") << '\n';
  const auto mode = mode_name(predicted.mode);
  for (std::size_t i = 0; i < predicted.layers.size(); ++i) {
    const auto& l = predicted.layers[i];
    out << l.index << ',' << to_string(l.config.kind()) << ',' << mode << ','
        << predicted.batch_size << ',' << format_real(l.time_ms);
    if (measured) out << ',' << format_real(measured->layers[i].time_ms);
    out << '\n';
  }
  out << "total,," << mode << ',' << predicted.batch_size << ','
      << format_real(predicted.batch_time_ms);
  if (measured) out << ',' << format_real(measured->batch_time_ms);
  out << '\n';
}

void write_modes_csv(std::ostream& out, const std::vector<ModeRow>& rows) {
  out << "layer_index,kind,batch,forward_ms,sgd_ms,adam_ms,unmodeled\n";
  for (const auto& r : rows) {
    out << r.layer_index << ',' << to_string(r.kind) << ',' << r.batch_size << ','
        << format_real(r.forward_ms) << ',' << format_real(r.sgd_ms) << ','
        << format_real(r.adam_ms) << ',' << (r.unmodeled ? 1 : 0) << '\n';
  }
}

}  // namespace epoch_oracle
