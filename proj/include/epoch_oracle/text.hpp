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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epoch_oracle {

/// Correctly rounded sum of `values` (Shewchuk's exact partials). The result
/// does not depend on the order of the inputs.
double exact_sum(std::span<const double> values);

/// Rounds to `digits` significant decimal digits.
double round_significant(double value, int digits);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);
/// Decimal text with exactly `digits` significant digits (printf %.Ng).
std::string format_real(double value, int digits);

std::optional<double> try_parse_real(std::string_view text);
std::optional<std::int64_t> try_parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace epoch_oracle
