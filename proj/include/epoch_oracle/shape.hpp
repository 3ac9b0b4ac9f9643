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

namespace epoch_oracle {

/// Spatial extent of a sliding-window output: floor((size + 2*padding - kernel) / stride) + 1.
/// Throws kInvalidArgument when any input is out of range or the window does not fit.
std::int64_t output_dim(std::int64_t size, std::int64_t kernel, std::int64_t stride,
                        std::int64_t padding);

}  // namespace epoch_oracle
