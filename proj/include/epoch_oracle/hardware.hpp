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
#include <string>
#include <string_view>
#include <vector>

namespace epoch_oracle {

enum class Connectivity { kPcie3x16, kPcie3x4, kNvlink, kHost };

inline constexpr Connectivity kAllConnectivities[] = {
    Connectivity::kPcie3x16, Connectivity::kPcie3x4, Connectivity::kNvlink, Connectivity::kHost};

std::string_view to_string(Connectivity c);
Connectivity parse_connectivity(std::string_view text);

/// Machine descriptor. Numbers are entered from spec sheets; nothing here is probed.
struct HardwareProfile {
  std::string name;
  std::string technology;  // e.g. Volta, Pascal, host-CPU
  std::int64_t gpu_count = 1;
  double memory_gb = 0;
  double clock_mhz = 0;
  double bandwidth_gbps = 0;
  std::int64_t core_count = 0;
  double peak_gflops = 0;
  Connectivity connectivity = Connectivity::kHost;

  bool operator==(const HardwareProfile&) const = default;
};

void validate(const HardwareProfile& hw);

/// Parses `key=value` lines (`#` comments allowed). A new `name=` line
/// starts a new profile, so one file may hold several. When peak_gflops is
/// omitted it defaults to 2 * cores * clock (one fused multiply-add per core
/// per cycle).
std::vector<HardwareProfile> parse_hardware_profiles(std::string_view text);
std::vector<HardwareProfile> load_hardware_profiles(const std::filesystem::path& path);

/// Loads a file and returns the profile called `name`, or the first profile
/// when `name` is empty.
HardwareProfile load_hardware_profile(const std::filesystem::path& path,
                                      std::string_view name = {});

std::string format_hardware_profile(const HardwareProfile& hw);

}  // namespace epoch_oracle
