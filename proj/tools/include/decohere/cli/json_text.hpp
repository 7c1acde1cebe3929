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

#include <string>

#include <json.hpp>

namespace decohere::cli {

/// Serializes with object keys in sorted order, floating-point numbers at
/// 17 significant digits and non-finite numbers as null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Six significant digits, followed by " (= n/d)" when the value is within
/// 1e-12 of a multiple of 1/16.
std::string format_number(double x);

}  // namespace decohere::cli
