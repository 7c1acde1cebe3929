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

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "decohere/family.hpp"

namespace decohere::cli {

/// Malformed or invalid family file. `where()` is "line:col" when the
/// offending value could be located in the source text.
class InputError : public std::runtime_error {
 public:
  InputError(std::string message, std::string pointer = {}, std::string where = {})
      : std::runtime_error(std::move(message)), pointer_(std::move(pointer)), where_(std::move(where)) {}
  const std::string& pointer() const noexcept { return pointer_; }
  const std::string& where() const noexcept { return where_; }

 private:
  std::string pointer_;
  std::string where_;
};

/// 1-based line and column of the value addressed by a JSON pointer in
/// well-formed JSON text; {0, 0} if the pointer does not resolve.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::string_view pointer);

/// Parses a family file and runs validate_family. Throws InputError.
HistoryFamily parse_family(std::string_view text, const Tolerance& tol = {});

/// Family file document for `f`; slot vectors are an orthonormal basis of
/// each projector's range.
nlohmann::json family_to_json(const HistoryFamily& f);

/// Resolves a branch given by one projector label per time. Throws
/// InputError.
Branch branch_from_labels(const HistoryFamily& f, const std::vector<std::string>& labels);

}  // namespace decohere::cli
