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

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "decohere/errors.hpp"
#include "decohere/family.hpp"
#include "decohere/random.hpp"
#include "decohere/search.hpp"
#include "oracle.hpp"
#include "example_fixture.hpp"

namespace decohere {
namespace {

using testing::jkf;

Projector rank1(const Vector& v) { return projector_from_vectors(std::span<const Vector>(&v, 1)); }

Vector basis(Eigen::Index n, Eigen::Index k) {
  Vector v = Vector::Zero(n);
  v[k] = 1.0;
  return v;
}

TEST(ValidateFamily, ExamplePasses) {
  const auto f = paper_example();
  const auto report = validate_family(f);
  EXPECT_TRUE(report.pass());
  for (const auto& c : report.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}

TEST(ValidateFamily, ExcludedBranchesVanish) {
  // The eight product branches the example leaves out all have zero
  // amplitude; the oracle computes them from the kets directly.
  const auto f = paper_example();
  const oracle::ExampleKets kets;
  const std::set<Branch> listed(f.explicit_branches()->begin(), f.explicit_branches()->end());
  int excluded = 0;
  for (int j = 1; j <= 2; ++j) {
    for (int k = 3; k <= 5; ++k) {
      for (int fin = 6; fin <= 8; ++fin) {
        if (listed.count(jkf(j, k, fin))) continue;
        ++excluded;
        EXPECT_LE(kets.probability(j, k, fin), 1e-30);
        EXPECT_LE(probability(f, jkf(j, k, fin)), 1e-12);
      }
    }
  }
  EXPECT_EQ(excluded, 8);
}

TEST(ValidateFamily, NonOrthogonalSlot) {
  const Vector a = basis(2, 0);
  const Vector b = (basis(2, 0) + basis(2, 1)) / std::sqrt(2.0);
  std::vector<TimeSlot> times;
  times.emplace_back("t", std::vector<Projector>{rank1(a), rank1(b)});
  const HistoryFamily f(StateDescriptor::pure(a), std::move(times));
  const auto report = validate_family(f);
  EXPECT_FALSE(report.pass());
  bool found = false;
  for (const auto& c : report.failures()) found = found || c.detail.find("NotOrthogonal") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(ValidateFamily, AllBranchesVacuous) {
  const auto f = random_family(3, std::vector<std::size_t>{2, 3}, 4);
  EXPECT_TRUE(f.has_all_branches());
  EXPECT_TRUE(validate_family(f).pass());
}

TEST(ValidateFamily, FlagsNonVanishingExclusion) {
  const auto paper = paper_example();
  auto branches = *paper.explicit_branches();
  branches.erase(branches.begin());  // drop 1>3>6, which has probability 1/16
  const HistoryFamily f(paper.initial(), paper.times(), branches);
  EXPECT_FALSE(validate_family(f).pass());
}

TEST(ValidateFamily, BadStates) {
  std::vector<TimeSlot> times;
  times.emplace_back("t", std::vector<Projector>{rank1(basis(2, 0))});
  const HistoryFamily unnormalized(StateDescriptor::pure(2.0 * basis(2, 0)), times);
  EXPECT_FALSE(validate_family(unnormalized).pass());
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.5;
  rho(1, 1) = -0.5;
  const HistoryFamily negative(StateDescriptor::mixed(rho), times);
  EXPECT_FALSE(validate_family(negative).pass());
}

TEST(HistoryFamily, StructuralErrors) {
  const auto paper = paper_example();
  auto dup = *paper.explicit_branches();
  dup.push_back(dup.front());
  EXPECT_THROW(HistoryFamily(paper.initial(), paper.times(), dup), Error);
  std::vector<Branch> bad{Branch{{0, 3, 0}}};
  try {
    HistoryFamily(paper.initial(), paper.times(), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidBranch);
  }
  EXPECT_THROW(HistoryFamily(StateDescriptor::pure(basis(2, 0)), paper.times()), Error);
  EXPECT_THROW(HistoryFamily(paper.initial(), {}), Error);
}

TEST(ChainOperator, SingleTimeIsProjector) {
  const auto f = random_family(3, std::vector<std::size_t>{3}, 1);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_LE(max_abs(chain_operator(f, Branch{{a}}) - f.times()[0][a].matrix()), 0.0);
  }
}

TEST(ChainOperator, ExampleBranch136) {
  // C = |6><6|3><3|1><1| = <6|3><3|1> |6><1|, built from the oracle's kets.
  const auto f = paper_example();
  const oracle::ExampleKets kets;
  const oracle::C coeff = oracle::braket(kets.k[6], kets.k[3]) * oracle::braket(kets.k[3], kets.k[1]);
  EXPECT_NEAR(std::abs(coeff - oracle::C(0.25, 0.25)), 0.0, 1e-15);
  const Matrix c = chain_operator(f, jkf(1, 3, 6));
  for (int r = 0; r < 3; ++r) {
    for (int s = 0; s < 3; ++s) {
      const oracle::C expected = coeff * kets.k[6][r] * std::conj(kets.k[1][s]);
      EXPECT_NEAR(std::abs(c(r, s) - expected), 0.0, 1e-15);
    }
  }
}

TEST(ChainOperator, VanishingOverlap) {
  const auto f = paper_example();
  EXPECT_LE(max_abs(chain_operator(f, jkf(1, 5, 6))), 1e-10);
  EXPECT_THROW(chain_operator(f, Branch{{0, 0}}), Error);
}

TEST(DecoherenceFunctional, ExampleValues) {
  const auto f = paper_example();
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 3, 6), jkf(1, 3, 6)) - 1.0 / 16), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 3, 6), jkf(2, 4, 6)) - 1.0 / 16), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 3, 6), jkf(2, 4, 7))), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 5, 8), jkf(2, 3, 7))), 0.0, 1e-12);
}

TEST(DecoherenceFunctional, MatchesOracleOnEveryPair) {
  const auto f = paper_example();
  const oracle::ExampleKets kets;
  for (int j = 1; j <= 2; ++j)
    for (int k = 3; k <= 5; ++k)
      for (int fi = 6; fi <= 8; ++fi)
        for (int j2 = 1; j2 <= 2; ++j2)
          for (int k2 = 3; k2 <= 5; ++k2)
            for (int f2 = 6; f2 <= 8; ++f2) {
              const Complex d = decoherence_functional(f, jkf(j, k, fi), jkf(j2, k2, f2));
              EXPECT_NEAR(std::abs(d - kets.decoherence(j, k, fi, j2, k2, f2)), 0.0, 1e-14);
            }
}

TEST(DecoherenceFunctional, MixedStateIsWeightedSum) {
  CounterRng rng(21);
  const auto pure = random_family(3, std::vector<std::size_t>{2, 3}, 8);
  const Vector a = random_unit_vector(3, rng);
  const Vector b = random_unit_vector(3, rng);
  const Matrix rho = 0.3 * a * a.adjoint() + 0.7 * b * b.adjoint();
  const HistoryFamily fa(StateDescriptor::pure(a), pure.times());
  const HistoryFamily fb(StateDescriptor::pure(b), pure.times());
  const HistoryFamily fm(StateDescriptor::mixed(rho), pure.times());
  EXPECT_TRUE(validate_family(fm).pass());
  const auto dm = decoherence_matrix(fm);
  for (const auto& h : fm.branches()) {
    for (const auto& h2 : fm.branches()) {
      const Complex expected = 0.3 * decoherence_functional(fa, h, h2) + 0.7 * decoherence_functional(fb, h, h2);
      EXPECT_NEAR(std::abs(decoherence_functional(fm, h, h2) - expected), 0.0, 1e-14);
    }
  }
  EXPECT_TRUE(dm.violations().empty());
}

TEST(Probability, ExampleValues) {
  const auto f = paper_example();
  EXPECT_NEAR(probability(f, jkf(1, 5, 8)), 0.25, 1e-12);
  EXPECT_NEAR(probability(f, jkf(2, 4, 7)), 1.0 / 16, 1e-12);
}

TEST(Probability, KernelOfFirstProjector) {
  std::vector<TimeSlot> times;
  times.emplace_back("a", std::vector<Projector>{rank1(basis(3, 0)), rank1(basis(3, 1))});
  times.emplace_back("b", std::vector<Projector>{rank1(basis(3, 0))});
  const HistoryFamily f(StateDescriptor::pure(basis(3, 2)), std::move(times));
  for (const auto& h : f.branches()) EXPECT_EQ(probability(f, h), 0.0);
}

TEST(Probability, ClampPolicy) {
  const Tolerance tol;
  EXPECT_EQ(clamp_probability(-5e-13, tol), 0.0);
  EXPECT_EQ(clamp_probability(-1e-9, tol), -1e-9);
  EXPECT_EQ(clamp_probability(1.0 + 5e-13, tol), 1.0);
  EXPECT_EQ(clamp_probability(0.25, tol), 0.25);
}

TEST(DecoherenceMatrix, Example) {
  const auto f = paper_example();
  const auto dm = decoherence_matrix(f);
  ASSERT_EQ(dm.entries.rows(), 10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double expected = i < 8 ? 1.0 / 16 : 0.25;
    EXPECT_NEAR(std::abs(dm.entries(i, i) - expected), 0.0, 1e-12);
  }
  // Branch order: 1>3>6, 1>4>6, 2>3>6, 2>4>6, 1>3>7, 1>4>7, 2>3>7, 2>4>7, ...
  EXPECT_NEAR(std::abs(dm.entries(4, 7) - (-1.0 / 16)), 0.0, 1e-12);
  EXPECT_TRUE(dm.violations().empty());
  EXPECT_GE(dm.min_eigenvalue(), -1e-12);
}

TEST(DecoherenceMatrix, SingleBranch) {
  const auto paper = paper_example();
  const HistoryFamily f(paper.initial(), paper.times(), std::vector<Branch>{jkf(1, 5, 8)});
  const auto dm = decoherence_matrix(f);
  ASSERT_EQ(dm.entries.rows(), 1);
  EXPECT_NEAR(dm.entries(0, 0).real(), 0.25, 1e-12);
}

TEST(DecoherenceMatrix, Cap) {
  const auto f = random_family(2, std::vector<std::size_t>{2, 2, 2, 2}, 1);
  try {
    decoherence_matrix(f, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyBranches);
  }
}

TEST(FinalStateProbabilities, Example) {
  const auto probs = final_state_probabilities(paper_example());
  ASSERT_EQ(probs.size(), 3u);
  EXPECT_NEAR(probs.at(0), 0.25, 1e-12);
  EXPECT_NEAR(probs.at(1), 0.25, 1e-12);
  EXPECT_NEAR(probs.at(2), 0.5, 1e-12);
}

TEST(FinalStateProbabilities, CompleteSlotSumsToOne) {
  const auto f = random_family(4, std::vector<std::size_t>{2, 4}, 17);
  double s = 0;
  for (const auto& [a, p] : final_state_probabilities(f)) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(FinalStateProbabilities, IdentitySlot) {
  std::vector<TimeSlot> times;
  times.emplace_back("id", std::vector<Projector>{Projector::from_matrix(Matrix::Identity(3, 3))});
  CounterRng rng(1);
  const HistoryFamily f(StateDescriptor::pure(random_unit_vector(3, rng)), std::move(times));
  const auto probs = final_state_probabilities(f);
  ASSERT_EQ(probs.size(), 1u);
  EXPECT_NEAR(probs.at(0), 1.0, 1e-12);
}

TEST(SampleBranches, DeterministicPerSeed) {
  const auto f = paper_example();
  const auto a = sample_branches(f, 5000, 99);
  const auto b = sample_branches(f, 5000, 99);
  const auto c = sample_branches(f, 5000, 100);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.out_of_family, b.out_of_family);
  EXPECT_NE(a.counts, c.counts);
  std::uint64_t total = a.out_of_family;
  for (const auto& [h, n] : a.counts) total += n;
  EXPECT_EQ(total, 5000u);
  EXPECT_EQ(a.total, 5000u);
  // |0> lies in the span of the first slot, and excluded branches have zero
  // amplitude, so nothing escapes the family.
  EXPECT_EQ(a.out_of_family, 0u);
}

TEST(SampleBranches, StateOutsideFirstSlot) {
  std::vector<TimeSlot> times;
  times.emplace_back("a", std::vector<Projector>{rank1(basis(3, 0)), rank1(basis(3, 1))});
  times.emplace_back("b", std::vector<Projector>{rank1(basis(3, 0)), rank1(basis(3, 1)), rank1(basis(3, 2))});
  const HistoryFamily f(StateDescriptor::pure(basis(3, 2)), std::move(times));
  const auto s = sample_branches(f, 1000, 5);
  EXPECT_EQ(s.out_of_family, 1000u);
  EXPECT_TRUE(s.counts.empty());
}

TEST(SampleBranches, FrequenciesNearProbabilities) {
  const auto f = random_family(3, std::vector<std::size_t>{2, 3, 2}, 23);
  const std::uint64_t n = 200000;
  const auto s = sample_branches(f, n, 1);
  for (const auto& h : f.branches()) {
    const double p = probability(f, h);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
    const auto it = s.counts.find(h);
    const double freq = it == s.counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
    EXPECT_LE(std::abs(freq - p), 4.0 * sigma + 1e-12) << f.branch_name(h);
  }
}

TEST(SampleBranches, MixedState) {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.25;
  rho(1, 1) = 0.75;
  std::vector<TimeSlot> times;
  times.emplace_back("z", std::vector<Projector>{rank1(basis(2, 0)), rank1(basis(2, 1))});
  const HistoryFamily f(StateDescriptor::mixed(rho), std::move(times));
  const std::uint64_t n = 100000;
  const auto s = sample_branches(f, n, 3);
  const double freq = static_cast<double>(s.counts.at(Branch{{0}})) / static_cast<double>(n);
  EXPECT_NEAR(freq, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / static_cast<double>(n)));
}

}  // namespace
}  // namespace decohere
