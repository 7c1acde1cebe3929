// Copyright 2026 The decohere Authors
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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace decohere {

using Block = std::vector<std::size_t>;
/// Blocks are sorted internally and ordered by their smallest element.
using Partition = std::vector<Block>;

/// Bell number B(n); saturates at UINT64_MAX.
std::uint64_t bell_number(std::size_t n) noexcept;

/// Every set partition of {0, ..., n-1}, in lexicographic order of their
/// restricted growth strings: the single block comes first and the
/// all-singletons partition last.
std::vector<Partition> set_partitions(std::size_t n);

}  // namespace decohere
