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

#include "decohere/cli/json_text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace decohere::cli {

namespace {

void write(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      // object_t is a std::map, so iteration is already key-sorted.
      out += '{';
      out += nl;
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        out += nlohmann::json(key).dump();
        out += indent > 0 ? ": " : ":";
        write(value, indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::none_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_structured(); });
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i > 0) out += indent > 0 ? ", " : ",";
          write(j[i], indent, depth + 1, out);
        }
        out += ']';
        return;
      }
      out += '[';
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) {
          out += ',';
          out += nl;
        }
        out += pad;
        write(j[i], indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  write(j, indent, 0, out);
  out += '\n';
  return out;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  std::string s = buf;
  if (!std::isfinite(x) || x == std::round(x)) return s;
  const double scaled = x * 16.0;
  const double n = std::round(scaled);
  if (std::abs(x - n / 16.0) > 1e-12 || std::abs(n) > 1e6) return s;
  auto num = static_cast<long long>(n);
  long long den = 16;
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 0) {
    num /= g;
    den /= g;
  }
  s += " (= " + std::to_string(num);
  if (den != 1) s += "/" + std::to_string(den);
  return s + ")";
}

}  // namespace decohere::cli
