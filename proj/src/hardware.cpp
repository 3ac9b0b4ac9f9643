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

#include "epoch_oracle/hardware.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/text.hpp"

namespace epoch_oracle {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_profile_real(std::string_view key, std::string_view value, int line) {
  const auto parsed = try_parse_real(value);
  if (!parsed || !std::isfinite(*parsed)) {
    fail(ErrorCode::kParseError, "hardware profile line " + std::to_string(line) + ": '" +
                                     std::string(key) + "' is not a number");
  }
  return *parsed;
}

std::int64_t parse_profile_int(std::string_view key, std::string_view value, int line) {
  const auto parsed = try_parse_int(value);
  if (!parsed) {
    fail(ErrorCode::kParseError, "hardware profile line " + std::to_string(line) + ": '" +
                                     std::string(key) + "' is not an integer");
  }
  return *parsed;
}

void finish_profile(HardwareProfile& hw, bool has_peak) {
  if (!has_peak) {
    hw.peak_gflops = 2.0 * static_cast<double>(hw.core_count) * hw.clock_mhz / 1000.0;
  }
  validate(hw);
}

}  // namespace

std::string_view to_string(Connectivity c) {
  switch (c) {
    case Connectivity::kPcie3x16: return "PCIe3x16";
    case Connectivity::kPcie3x4: return "PCIe3x4";
    case Connectivity::kNvlink: return "NVLink";
    case Connectivity::kHost: return "host";
  }
  return "host";
}

Connectivity parse_connectivity(std::string_view text) {
  const std::string key = lower(trim(text));
  if (key == "pcie3x16" || key == "pcie") return Connectivity::kPcie3x16;
  if (key == "pcie3x4") return Connectivity::kPcie3x4;
  if (key == "nvlink") return Connectivity::kNvlink;
  if (key == "host") return Connectivity::kHost;
  fail(ErrorCode::kInvalidArgument, "unknown connectivity '" + std::string(text) + "'");
}

void validate(const HardwareProfile& hw) {
  require(!hw.name.empty(), "hardware profile needs a name");
  require(hw.name.find_first_of(",\n\r") == std::string::npos,
          "hardware name may not contain commas or newlines");
  const std::string who = "hardware profile '" + hw.name + "': ";
  require(hw.gpu_count >= 1, who + "gpu_count must be >= 1");
  require(std::isfinite(hw.memory_gb) && hw.memory_gb > 0, who + "memory_gb must be > 0");
  require(std::isfinite(hw.clock_mhz) && hw.clock_mhz > 0, who + "clock_mhz must be > 0");
  require(std::isfinite(hw.bandwidth_gbps) && hw.bandwidth_gbps > 0,
          who + "bandwidth_gbps must be > 0");
  require(hw.core_count > 0, who + "cores must be > 0");
  require(std::isfinite(hw.peak_gflops) && hw.peak_gflops > 0, who + "peak_gflops must be > 0");
}

std::vector<HardwareProfile> parse_hardware_profiles(std::string_view text) {
  std::vector<HardwareProfile> profiles;
  bool open = false;
  bool has_peak = false;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kParseError,
           "hardware profile line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "name") {
      if (open) finish_profile(profiles.back(), has_peak);
      profiles.emplace_back();
      profiles.back().name = std::string(value);
      open = true;
      has_peak = false;
      continue;
    }
    if (!open) {
      fail(ErrorCode::kParseError,
           "hardware profile line " + std::to_string(line_no) + ": 'name=' must come first");
    }
    HardwareProfile& hw = profiles.back();
    if (key == "technology") {
      hw.technology = std::string(value);
    } else if (key == "gpu_count") {
      hw.gpu_count = parse_profile_int(key, value, line_no);
    } else if (key == "cores") {
      hw.core_count = parse_profile_int(key, value, line_no);
    } else if (key == "clock_mhz") {
      hw.clock_mhz = parse_profile_real(key, value, line_no);
    } else if (key == "memory_gb") {
      hw.memory_gb = parse_profile_real(key, value, line_no);
    } else if (key == "bandwidth_gbps") {
      hw.bandwidth_gbps = parse_profile_real(key, value, line_no);
    } else if (key == "peak_gflops") {
      hw.peak_gflops = parse_profile_real(key, value, line_no);
      has_peak = true;
    } else if (key == "connectivity") {
      hw.connectivity = parse_connectivity(value);
    } else {
      fail(ErrorCode::kParseError, "hardware profile line " + std::to_string(line_no) +
                                       ": unknown key '" + key + "'");
    }
  }
  if (open) finish_profile(profiles.back(), has_peak);
  return profiles;
}

std::vector<HardwareProfile> load_hardware_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open hardware profile " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_hardware_profiles(buffer.str());
}

HardwareProfile load_hardware_profile(const std::filesystem::path& path, std::string_view name) {
  auto profiles = load_hardware_profiles(path);
  if (profiles.empty()) {
    fail(ErrorCode::kParseError, "no hardware profile in " + path.string());
  }
  if (name.empty()) return profiles.front();
  for (auto& hw : profiles) {
    if (hw.name == name) return hw;
  }
  fail(ErrorCode::kInvalidArgument,
       "no hardware profile named '" + std::string(name) + "' in " + path.string());
}

std::string format_hardware_profile(const HardwareProfile& hw) {
  std::ostringstream out;
  out << "name=" << hw.name << '\n';
  if (!hw.technology.empty()) out << "technology=" << hw.technology << '\n';
  out << "gpu_count=" << hw.gpu_count << '\n'
      << "cores=" << hw.core_count << '\n'
      << "clock_mhz=" << format_real(hw.clock_mhz) << '\n'
      << "memory_gb=" << format_real(hw.memory_gb) << '\n'
      << "bandwidth_gbps=" << format_real(hw.bandwidth_gbps) << '\n'
      << "peak_gflops=" << format_real(hw.peak_gflops) << '\n'
      << "connectivity=" << to_string(hw.connectivity) << '\n';
  return out.str();
}

}  // namespace epoch_oracle
