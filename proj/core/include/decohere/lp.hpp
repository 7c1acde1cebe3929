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

// Linearly positive probabilities p(h) = Re tr(C_h rho), compared against
// the Born / von Neumann value tr(C_h rho C_h^dagger).

#include <vector>

#include "decohere/family.hpp"

namespace decohere {

/// Re tr(C_h rho), unclamped. Throws InvalidBranch.
double lp_value(const HistoryFamily& f, const Branch& h);

struct LpRow {
  Branch branch;
  double lp_value = 0.0;
  double born_value = 0.0;
  /// lp_value < -eps_prob.
  bool lp_negative = false;
  /// |lp_value - born_value| > eps_zero.
  bool mismatch = false;
};

struct LpReport {
  std::vector<LpRow> rows;
  bool family_weak = false;

  std::size_t mismatches() const noexcept;
  std::size_t negatives() const noexcept;
};

LpReport lp_report(const HistoryFamily& f, const Tolerance& tol = {});

}  // namespace decohere
