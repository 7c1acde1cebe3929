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

#include "decohere/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace decohere {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index * kGolden + 1));
}

Vector random_unit_vector(std::size_t dim, CounterRng& rng) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal();
  return v / v.norm();
}

Matrix random_unitary(std::size_t dim, CounterRng& rng) {
  std::vector<Vector> cols;
  cols.reserve(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal();
    cols.push_back(std::move(v));
  }
  // Gaussian columns are independent with probability one; a tiny floor
  // keeps the call from rejecting the astronomically rare near-degenerate draw.
  const auto frame = gram_schmidt(cols, Tolerance{1e-300, 1e-300});
  Matrix u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) u.col(static_cast<Eigen::Index>(c)) = frame[c];
  return u;
}

Matrix random_hermitian(std::size_t dim, CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = rng.normal();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      h(i, j) = rng.complex_normal();
      h(j, i) = std::conj(h(i, j));
    }
  }
  const double m = max_abs(h);
  return m > 0.0 ? Matrix(h / m) : h;
}

}  // namespace decohere
