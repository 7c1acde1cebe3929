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

#include <cstdint>

#include "decohere/hilbert.hpp"

namespace decohere {

/// Counter-based generator: the n-th output is a pure function of
/// (seed, n), a SplitMix64 finalizer applied to the Weyl sequence. Results
/// depend only on integer arithmetic, so streams are identical on every
/// platform. Normal and uniform draws use fixed conversions (no
/// std::*_distribution, whose algorithms are implementation-defined).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal (Box-Muller, both outputs used).
  double normal() noexcept;
  /// Independent standard normal real and imaginary parts.
  Complex complex_normal() noexcept { return {normal(), normal()}; }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a parent seed and a child index into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Random unit vector with i.i.d. complex Gaussian entries, normalized.
Vector random_unit_vector(std::size_t dim, CounterRng& rng);

/// Orthonormal frame from Gram-Schmidt on a complex Gaussian matrix; the
/// columns are Haar-distributed up to per-column phases.
Matrix random_unitary(std::size_t dim, CounterRng& rng);

/// Random Hermitian matrix with Gaussian entries, scaled so its largest
/// entry magnitude is 1.
Matrix random_hermitian(std::size_t dim, CounterRng& rng);

}  // namespace decohere
