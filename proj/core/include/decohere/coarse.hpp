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

// Coarse-graining and the three decoherence deciders.
//
// Minimal decoherence is read as "every projection sum rule holds": for
// every combined coarse-graining (one set partition of the projector
// indices per time, blocks replaced by summed projectors) the probability
// of each coarse branch equals the sum of the probabilities of the fine
// branches in its cell. Cells are full Cartesian products of blocks, so fine
// branches that a family leaves out still contribute. Other readings (sum
// rules only over "logically meaningful" subsets) would accept more
// families; this library always uses all partitions.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decohere/family.hpp"
#include "decohere/partitions.hpp"

namespace decohere {

inline constexpr std::size_t kDefaultGrainingCap = 100'000;

class CoarseGraining {
 public:
  /// Canonicalizes block order. Throws InvalidArgument for empty or
  /// overlapping blocks.
  explicit CoarseGraining(std::vector<Partition> per_time);

  static CoarseGraining identity(const HistoryFamily& f);

  const std::vector<Partition>& partitions() const noexcept { return parts_; }
  std::size_t num_times() const noexcept { return parts_.size(); }
  bool is_identity() const noexcept;

  /// Throws InvalidArgument unless each time's blocks cover that slot's
  /// indices exactly once.
  void require_valid_for(const HistoryFamily& f) const;

  /// Block containing fine index `index` at time `t`.
  std::size_t block_of(std::size_t t, std::size_t index) const;

  /// Maps a fine branch to its coarse branch (block indices).
  Branch coarsen(const Branch& fine) const;

  auto operator<=>(const CoarseGraining& other) const { return parts_ <=> other.parts_; }
  bool operator==(const CoarseGraining& other) const { return parts_ == other.parts_; }

 private:
  std::vector<Partition> parts_;
  std::vector<std::vector<std::size_t>> block_index_;
};

/// e.g. "j:{1,2} | k:{3,4}{5} | f:{6}{7}{8}" using projector labels.
std::string describe(const HistoryFamily& f, const CoarseGraining& g);

/// All combined grainings except the identity, in odometer order (last time
/// fastest) over each slot's lexicographic partition list. Throws
/// TooManyGrainings if the count exceeds `cap`.
std::vector<CoarseGraining> enumerate_grainings(const HistoryFamily& f, std::size_t cap = kDefaultGrainingCap);

/// Number of grainings enumerate_grainings would return (saturating).
std::uint64_t graining_count(const HistoryFamily& f) noexcept;

/// Replaces each block with its summed projector (labels joined with '+').
/// A coarse branch is kept iff some listed fine branch maps into it.
HistoryFamily coarse_family(const HistoryFamily& f, const CoarseGraining& g, const Tolerance& tol = {});

struct SumRuleRow {
  Branch coarse_branch;
  double coarse_probability = 0.0;
  double fine_sum = 0.0;
  /// coarse_probability - fine_sum.
  double residual = 0.0;
  /// Every fine branch of the cell, listed or not.
  std::vector<Branch> fine_branches;
};

struct SumRuleReport {
  CoarseGraining graining;
  std::vector<SumRuleRow> rows;
  double max_abs_residual = 0.0;
  bool pass = true;
};

SumRuleReport check_sum_rule(const HistoryFamily& f, const CoarseGraining& g, const Tolerance& tol = {});

enum class DecoherenceLevel { minimal, weak, medium };

std::string_view to_string(DecoherenceLevel level) noexcept;

struct Witness {
  /// Set for minimal-decoherence witnesses.
  std::optional<CoarseGraining> graining;
  /// Set for weak/medium witnesses.
  std::optional<std::pair<Branch, Branch>> pair;
  /// Signed residual (minimal), Re D (weak) or |D| (medium).
  double value = 0.0;
  double magnitude = 0.0;
};

struct DecoherenceVerdict {
  DecoherenceLevel level = DecoherenceLevel::minimal;
  bool pass = true;
  /// Largest magnitude seen, violating or not; earliest wins ties. Empty
  /// only when there is nothing to check.
  std::optional<Witness> worst;
  std::vector<Witness> violations;
  /// Number of grainings or branch pairs examined.
  std::size_t checked = 0;
};

DecoherenceVerdict check_minimal(const HistoryFamily& f, const Tolerance& tol = {},
                                 std::size_t cap = kDefaultGrainingCap);
/// Pairs are taken over the listed branches only.
DecoherenceVerdict check_weak(const HistoryFamily& f, const Tolerance& tol = {});
DecoherenceVerdict check_medium(const HistoryFamily& f, const Tolerance& tol = {});
DecoherenceVerdict check_level(const HistoryFamily& f, DecoherenceLevel level, const Tolerance& tol = {});

/// tr((sum C_h) rho (sum C_h)^dagger) over the distinct branches of `set`.
/// Throws EmptySet or InvalidBranch.
double history_sum_quantity(const HistoryFamily& f, std::span<const Branch> set);

struct HistorySumRule {
  double quantity = 0.0;
  double prob_sum = 0.0;
  double residual = 0.0;
  bool pass = true;
};

HistorySumRule check_history_sum_rule(const HistoryFamily& f, std::span<const Branch> set,
                                      const Tolerance& tol = {});

}  // namespace decohere
