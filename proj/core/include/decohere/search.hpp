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

// Family builders and the numerical search for families that satisfy every
// projection sum rule while violating weak decoherence.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "decohere/family.hpp"

namespace decohere {

/// The three-time, ten-branch example: |0> = (|1> + i|2>)/sqrt2 in the
/// basis {|3>, |4>, |5>}, slots {1,2}, {3,4,5}, {6,7,8}, and the branches
/// that avoid 3/4 -> 8 and 5 -> 6/7.
HistoryFamily paper_example();

/// Each slot holds rank-1 projectors onto the first k columns of a random
/// orthonormal frame; the initial state is a random unit vector; branches
/// are ALL. Deterministic per seed. Throws InvalidArgument if a slot size
/// exceeds `dim` or is zero.
HistoryFamily random_family(std::size_t dim, std::span<const std::size_t> slot_sizes, std::uint64_t seed);

/// Conjugates every projector by `u`, and the initial state too when
/// `include_state` is set.
HistoryFamily conjugate_family(const HistoryFamily& f, const Matrix& u, bool include_state = true);

/// Applies an independent random unitary exp(i m H) to each slot's
/// projectors (H Hermitian with unit max-norm). The initial state is left
/// alone; magnitude 0 returns the family unchanged.
HistoryFamily perturb_family(const HistoryFamily& f, double magnitude, std::uint64_t seed);

struct SearchParams {
  std::size_t dim = 3;
  std::vector<std::size_t> slot_sizes{2, 3, 3};
  std::uint64_t seed = 0;
  /// Maximum number of objective evaluations.
  std::uint64_t budget = 100'000;
  double residual_target = 1e-8;
  double violation_floor = 1e-2;
  /// Weight of the capped weak-violation reward.
  double lambda = 10.0;
  /// Step below which a local refinement is considered converged.
  double min_step = 1e-12;
  double initial_step = 0.25;

  /// Throws InvalidArgument.
  void validate() const;
};

struct SearchOutcome {
  bool found = false;
  /// The found family, or the best candidate when nothing was found.
  std::optional<HistoryFamily> family;
  /// Largest projection-sum-rule residual over all grainings (and the
  /// largest probability of an unlisted branch, for explicit branch lists).
  double minimal_residual = 0.0;
  /// Largest |Re D(h, h')| over distinct listed branches.
  double max_weak_violation = 0.0;
  double objective = 0.0;
  std::uint64_t evaluations_used = 0;
  std::size_t restarts = 0;
};

/// Minimizes the sum of squared sum-rule residuals over every cell of every
/// graining (plus squared probabilities of unlisted branches) minus lambda *
/// min(2 * floor, max |Re D|)^2 over per-time unitary frames exp(iH) applied to
/// a reference family, with derivative-free pattern search and random
/// restarts. With `start`, restart 0 uses it as the reference (dim and slot
/// sizes are taken from it); later restarts use random_family. Returns as
/// soon as a start already satisfies both thresholds; otherwise a found
/// restart is polished to convergence before returning. Deterministic for
/// fixed params.
SearchOutcome search_minimal_not_weak(const SearchParams& params,
                                      const std::optional<HistoryFamily>& start = std::nullopt);

}  // namespace decohere
