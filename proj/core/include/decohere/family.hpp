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

// History families: an initial state, an ordered list of time slots (each a
// list of mutually orthogonal projectors), and the set of branches that the
// family considers. Times are ordinal: slot 0 is the earliest.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decohere/hilbert.hpp"

namespace decohere {

inline constexpr std::size_t kDefaultBranchCap = 1'000'000;

class StateDescriptor {
 public:
  enum class Kind { pure, mixed };

  static StateDescriptor pure(Vector psi);
  static StateDescriptor mixed(Matrix rho);

  Kind kind() const noexcept { return kind_; }
  bool is_pure() const noexcept { return kind_ == Kind::pure; }
  std::size_t dim() const noexcept;
  /// Only meaningful for pure states.
  const Vector& vector() const noexcept { return psi_; }
  /// The density matrix (|psi><psi| for pure states).
  const Matrix& density() const noexcept { return rho_; }
  /// A matrix L with L L^dagger = rho: psi itself for pure states, otherwise
  /// eigenvectors scaled by the square roots of the nonnegative eigenvalues.
  const Matrix& factor() const noexcept { return factor_; }

  /// Empty when normalization, Hermiticity and positivity hold.
  std::vector<std::string> violations(const Tolerance& tol = {}) const;

 private:
  StateDescriptor(Kind kind, Vector psi, Matrix rho, Matrix factor)
      : kind_(kind), psi_(std::move(psi)), rho_(std::move(rho)), factor_(std::move(factor)) {}

  Kind kind_;
  Vector psi_;
  Matrix rho_;
  Matrix factor_;
};

class TimeSlot {
 public:
  /// `projector_labels` defaults to "0", "1", ... when empty.
  TimeSlot(std::string label, std::vector<Projector> projectors,
           std::vector<std::string> projector_labels = {});

  const std::string& label() const noexcept { return label_; }
  const std::vector<Projector>& projectors() const noexcept { return projectors_; }
  const std::vector<std::string>& projector_labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return projectors_.size(); }
  const Projector& operator[](std::size_t i) const { return projectors_.at(i); }

  /// Sum of all projectors in the slot.
  Matrix total() const;
  /// True when the projectors sum to the identity within eps_zero.
  bool complete(const Tolerance& tol = {}) const;
  /// Orthogonality and "sum is a projector" checks; empty when they hold.
  std::vector<std::string> violations(const Tolerance& tol = {}) const;

 private:
  std::string label_;
  std::vector<Projector> projectors_;
  std::vector<std::string> labels_;
};

/// One slot index per time, earliest first.
struct Branch {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  std::size_t operator[](std::size_t t) const { return indices.at(t); }
  auto operator<=>(const Branch&) const = default;
};

class HistoryFamily {
 public:
  /// `branches == nullopt` means every element of the Cartesian product.
  /// Throws DimensionMismatch, InvalidArgument or InvalidBranch on
  /// structurally malformed input; physical invariants are left to
  /// validate_family.
  HistoryFamily(StateDescriptor initial, std::vector<TimeSlot> times,
                std::optional<std::vector<Branch>> branches = std::nullopt);

  std::size_t dim() const noexcept { return dim_; }
  const StateDescriptor& initial() const noexcept { return initial_; }
  const std::vector<TimeSlot>& times() const noexcept { return times_; }
  std::size_t num_times() const noexcept { return times_.size(); }
  std::vector<std::size_t> slot_sizes() const;

  bool has_all_branches() const noexcept { return !explicit_.has_value(); }
  const std::optional<std::vector<Branch>>& explicit_branches() const noexcept { return explicit_; }

  /// Number of Cartesian-product branches (saturates at SIZE_MAX).
  std::size_t product_size() const noexcept;
  /// The listed branches, expanding ALL. Throws TooManyBranches past `cap`.
  std::vector<Branch> branches(std::size_t cap = kDefaultBranchCap) const;
  std::size_t num_branches() const noexcept;

  bool is_valid_branch(const Branch& h) const noexcept;
  /// Throws InvalidBranch.
  void require_valid(const Branch& h) const;
  bool lists(const Branch& h) const;

  /// "1>3>6" style name built from projector labels.
  std::string branch_name(const Branch& h) const;

 private:
  std::size_t dim_;
  StateDescriptor initial_;
  std::vector<TimeSlot> times_;
  std::optional<std::vector<Branch>> explicit_;
};

/// Calls `fn` for every branch of the product of `sizes`, odometer order
/// with the last time varying fastest.
void for_each_product_branch(std::span<const std::size_t> sizes,
                             const std::function<void(const Branch&)>& fn);

struct ValidationCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool pass() const noexcept;
  std::vector<ValidationCheck> failures() const;
};

/// Checks slot invariants, state invariants, and that every product branch
/// missing from an explicit branch list has probability <= eps_prob.
ValidationReport validate_family(const HistoryFamily& f, const Tolerance& tol = {});

/// C_h = P^(T)_{h_T} ... P^(1)_{h_1}, latest time leftmost.
Matrix chain_operator(const HistoryFamily& f, const Branch& h);

/// D(h, h2) = tr(C_h rho C_h2^dagger).
Complex decoherence_functional(const HistoryFamily& f, const Branch& h, const Branch& h2);

/// Re D(h, h). Throws InvariantViolation if the value is below -eps_prob or
/// carries an imaginary part above eps_prob.
double probability(const HistoryFamily& f, const Branch& h, const Tolerance& tol = {});

/// Reporting clamp: values in [-eps_prob, 0) become 0, values in
/// (1, 1 + eps_prob] become 1.
double clamp_probability(double p, const Tolerance& tol = {});

/// C_h L for every branch in `hs`, where L L^dagger = rho. Entry (h, h2) of
/// the decoherence matrix is the Frobenius inner product of images h2 and h.
std::vector<Matrix> chain_images(const HistoryFamily& f, std::span<const Branch> hs);

/// Frobenius inner product <b, a> = tr(a b^dagger); with chain images this
/// yields D(h_a, h_b).
Complex image_overlap(const Matrix& a, const Matrix& b);

struct DecoherenceMatrix {
  std::vector<Branch> branches;
  Matrix entries;

  /// Hermiticity, real nonnegative diagonal, positive semidefiniteness.
  std::vector<std::string> violations(const Tolerance& tol = {}) const;
  double min_eigenvalue() const;
};

DecoherenceMatrix decoherence_matrix(const HistoryFamily& f, std::size_t cap = kDefaultBranchCap);

/// tr(P_a rho P_a) for each index a of the final slot.
std::map<std::size_t, double> final_state_probabilities(const HistoryFamily& f);

struct SampleCounts {
  std::map<Branch, std::uint64_t> counts;
  /// Runs that fell outside every projector of some slot, or produced a
  /// product branch the family does not list.
  std::uint64_t out_of_family = 0;
  std::uint64_t total = 0;
};

/// Simulates `n` runs of sequential projective measurement with Lueders
/// updates. Deterministic for a given seed.
SampleCounts sample_branches(const HistoryFamily& f, std::uint64_t n, std::uint64_t seed);

}  // namespace decohere
