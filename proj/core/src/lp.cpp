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

#include "decohere/lp.hpp"

#include <algorithm>
#include <cmath>

#include "decohere/coarse.hpp"

namespace decohere {

double lp_value(const HistoryFamily& f, const Branch& h) {
  return (chain_operator(f, h) * f.initial().density()).trace().real();
}

std::size_t LpReport::mismatches() const noexcept {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const LpRow& r) { return r.mismatch; }));
}

std::size_t LpReport::negatives() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const LpRow& r) { return r.lp_negative; }));
}

LpReport lp_report(const HistoryFamily& f, const Tolerance& tol) {
  LpReport report;
  for (const auto& h : f.branches()) {
    LpRow row;
    row.branch = h;
    row.lp_value = lp_value(f, h);
    row.born_value = probability(f, h, tol);
    row.lp_negative = row.lp_value < -tol.eps_prob;
    row.mismatch = std::abs(row.lp_value - row.born_value) > tol.eps_zero;
    report.rows.push_back(std::move(row));
  }
  report.family_weak = check_weak(f, tol).pass;
  return report;
}

}  // namespace decohere
