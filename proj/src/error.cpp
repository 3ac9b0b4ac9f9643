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

#include "epoch_oracle/error.hpp"
#include "epoch_oracle/shape.hpp"

#include <string>

namespace epoch_oracle {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kVersionError: return "version-error";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kNumericalError: return "numerical-error";
    case ErrorCode::kResourceExhausted: return "resource-exhausted";
    case ErrorCode::kUnsupportedLayer: return "unsupported-layer";
  }
  return "unknown";
}

std::int64_t output_dim(std::int64_t size, std::int64_t kernel, std::int64_t stride,
                        std::int64_t padding) {
  require(size >= 1 && kernel >= 1 && stride >= 1 && padding >= 0,
          "output_dim: size, kernel and stride must be >= 1 and padding >= 0");
  const std::int64_t span = size + 2 * padding - kernel;
  if (span < 0) {
    fail(ErrorCode::kInvalidArgument,
         "output_dim: kernel " + std::to_string(kernel) + " does not fit input " +
             std::to_string(size) + " with padding " + std::to_string(padding));
  }
  return span / stride + 1;
}

}  // namespace epoch_oracle
