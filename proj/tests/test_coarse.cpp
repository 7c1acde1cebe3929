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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <set>

#include <gtest/gtest.h>

#include "decohere/coarse.hpp"
#include "decohere/errors.hpp"
#include "decohere/random.hpp"
#include "decohere/search.hpp"
#include "generators.hpp"
#include "example_fixture.hpp"

namespace decohere {
namespace {

using testing::jkf;

HistoryFamily with_state(const HistoryFamily& f, const Vector& psi) {
  return HistoryFamily(StateDescriptor::pure(psi), f.times(), f.explicit_branches());
}

/// |6> <-> |7> in the final slot (labels follow their kets).
HistoryFamily swap_67(const HistoryFamily& f) {
  const auto& last = f.times()[2];
  std::vector<Projector> ps{last[1], last[0], last[2]};
  auto times = f.times();
  times[2] = TimeSlot(last.label(), std::move(ps), {"7", "6", "8"});
  return HistoryFamily(f.initial(), std::move(times), f.explicit_branches());
}

/// Branch name with the labels inside each merged block sorted.
std::string canonical_name(const HistoryFamily& f, const Branch& h) {
  std::string out;
  for (std::size_t t = 0; t < h.size(); ++t) {
    std::vector<std::string> parts;
    std::stringstream ss(f.times()[t].projector_labels()[h[t]]);
    for (std::string item; std::getline(ss, item, '+');) parts.push_back(item);
    std::sort(parts.begin(), parts.end());
    if (t > 0) out += '>';
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "+" : "") + parts[i];
  }
  return out;
}

CoarseGraining graining(std::vector<Partition> parts) { return CoarseGraining(std::move(parts)); }

TEST(Partitions, BellNumbers) {
  const std::uint64_t expected[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 0; n < 9; ++n) {
    EXPECT_EQ(bell_number(n), expected[n]);
    EXPECT_EQ(set_partitions(n).size(), expected[n]);
  }
}

TEST(Partitions, DistinctAndCovering) {
  const auto parts = set_partitions(5);
  std::set<Partition> seen(parts.begin(), parts.end());
  EXPECT_EQ(seen.size(), parts.size());
  for (const auto& p : parts) {
    std::set<std::size_t> covered;
    for (const auto& b : p) covered.insert(b.begin(), b.end());
    EXPECT_EQ(covered.size(), 5u);
  }
  EXPECT_EQ(parts.front().size(), 1u);
  EXPECT_EQ(parts.back().size(), 5u);
}

TEST(EnumerateGrainings, Counts) {
  EXPECT_EQ(enumerate_grainings(paper_example()).size(), 49u);
  EXPECT_EQ(enumerate_grainings(random_family(2, std::vector<std::size_t>{2}, 0)).size(), 1u);
  EXPECT_EQ(enumerate_grainings(random_family(2, std::vector<std::size_t>{2, 2}, 0)).size(), 3u);
  const auto all = enumerate_grainings(paper_example());
  for (const auto& g : all) EXPECT_FALSE(g.is_identity());
  EXPECT_EQ(std::set<CoarseGraining>(all.begin(), all.end()).size(), all.size());
}

TEST(EnumerateGrainings, Cap) {
  const auto f = random_family(5, std::vector<std::size_t>{5, 5, 5}, 0);
  try {
    enumerate_grainings(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyGrainings);
    EXPECT_NE(std::string(e.what()).find("140607"), std::string::npos);
  }
}

TEST(CoarseGraining, RejectsMalformed) {
  EXPECT_THROW(graining({{{0, 1}, {1}}}), Error);
  EXPECT_THROW(graining({{{}}}), Error);
  const auto f = paper_example();
  EXPECT_THROW(graining({{{0, 1}}, {{0, 1, 2}}}).require_valid_for(f), Error);
  EXPECT_THROW(graining({{{0, 1}}, {{0, 1}}, {{0, 1, 2}}}).require_valid_for(f), Error);
}

TEST(CoarseFamily, IdentityUnchanged) {
  const auto f = paper_example();
  const auto cf = coarse_family(f, CoarseGraining::identity(f));
  ASSERT_EQ(cf.num_times(), f.num_times());
  for (std::size_t t = 0; t < f.num_times(); ++t) {
    ASSERT_EQ(cf.times()[t].size(), f.times()[t].size());
    for (std::size_t a = 0; a < f.times()[t].size(); ++a) {
      EXPECT_LE(max_abs(cf.times()[t][a].matrix() - f.times()[t][a].matrix()), 0.0);
    }
  }
  EXPECT_EQ(*cf.explicit_branches(), *f.explicit_branches());
}

TEST(CoarseFamily, MergeMiddle34) {
  const auto f = paper_example();
  const auto cf = coarse_family(f, graining({{{0}, {1}}, {{0, 1}, {2}}, {{0}, {1}, {2}}}));
  const auto& mid = cf.times()[1];
  ASSERT_EQ(mid.size(), 2u);
  EXPECT_EQ(mid.projector_labels()[0], "3+4");
  EXPECT_EQ(mid[0].rank(), 2u);
  EXPECT_LE(max_abs(mid[0].matrix() - (f.times()[1][0].matrix() + f.times()[1][1].matrix())), 1e-15);
  EXPECT_LE(max_abs(mid[1].matrix() - f.times()[1][2].matrix()), 0.0);
  // Ten fine branches collapse to 2*1*2 (through 3+4 to 6,7) + 2 (through 5 to 8).
  EXPECT_EQ(cf.explicit_branches()->size(), 6u);
}

TEST(CoarseFamily, FullMerge) {
  const auto f = random_family(3, std::vector<std::size_t>{2, 3, 2}, 12);
  const auto cf = coarse_family(f, graining({{{0, 1}}, {{0, 1, 2}}, {{0, 1}}}));
  ASSERT_EQ(cf.branches().size(), 1u);
  Matrix c = f.times()[2].total() * f.times()[1].total() * f.times()[0].total();
  const double expected = (c * f.initial().density() * c.adjoint()).trace().real();
  EXPECT_NEAR(probability(cf, cf.branches()[0]), expected, 1e-14);
}

TEST(CheckSumRule, ExampleMiddleMerge) {
  const auto f = paper_example();
  const auto r = check_sum_rule(f, graining({{{0}, {1}}, {{0, 1}, {2}}, {{0}, {1}, {2}}}));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_abs_residual, 1e-12);
  for (const auto& row : r.rows) EXPECT_NEAR(row.residual, 0.0, 1e-12);
}

TEST(CheckSumRule, ExampleFirstMerge) {
  const auto f = paper_example();
  const auto r = check_sum_rule(f, graining({{{0, 1}}, {{0}, {1}, {2}}, {{0}, {1}, {2}}}));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_abs_residual, 1e-12);
}

TEST(CheckSumRule, CellsIncludeExcludedBranches) {
  // Merging 4 and 5 puts 1>5>6 (excluded, zero) in the cell of 1>4>6.
  const auto f = paper_example();
  const auto r = check_sum_rule(f, graining({{{0}, {1}}, {{0}, {1, 2}}, {{0}, {1}, {2}}}));
  bool saw = false;
  for (const auto& row : r.rows) {
    for (const auto& h : row.fine_branches) saw = saw || h == jkf(1, 5, 6);
  }
  EXPECT_TRUE(saw);
  EXPECT_TRUE(r.pass);
}

TEST(CheckSumRule, FinalTimeMergesAreExact) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto f = gen::random_block_family(seed);
    std::vector<Partition> parts;
    for (std::size_t t = 0; t + 1 < f.num_times(); ++t) {
      Partition p;
      for (std::size_t i = 0; i < f.times()[t].size(); ++i) p.push_back({i});
      parts.push_back(p);
    }
    Block all;
    for (std::size_t i = 0; i < f.times().back().size(); ++i) all.push_back(i);
    parts.push_back({all});
    const auto r = check_sum_rule(f, graining(parts));
    EXPECT_LE(r.max_abs_residual, 1e-14) << "seed " << seed;
    EXPECT_TRUE(r.pass);
  }
}

TEST(CheckMinimal, ExamplePasses) {
  const auto v = check_minimal(paper_example());
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.checked, 49u);
  ASSERT_TRUE(v.worst.has_value());
  EXPECT_LE(v.worst->magnitude, 1e-10);
  EXPECT_TRUE(v.violations.empty());
}

TEST(CheckMinimal, InitialKet1IsWeaklyDecoherent) {
  // With |1> as the initial state only j = 1 branches carry amplitude and
  // every remaining cross term is purely imaginary (e.g. D(1>3>6, 1>4>6) = i/8),
  // so the family passes minimal and weak decoherence alike.
  const auto paper = paper_example();
  Vector v1(3);
  v1 << 0.5, 0.5, 1.0 / std::sqrt(2.0);
  const auto f = with_state(paper, v1);
  EXPECT_TRUE(check_minimal(f).pass);
  EXPECT_TRUE(check_weak(f).pass);
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 3, 6), jkf(1, 4, 6)) - Complex(0, 0.125)), 0.0, 1e-12);
}

TEST(CheckMinimal, GenericStateFails) {
  // |3> as the initial state: <j|3> = 1/2 for both j, so the first-time
  // merge {1,2} leaves interference in every cell. The largest is the 5>8
  // cell, where <5|1> = -<5|2> = 1/sqrt(2) gives 2 Re D(1>5>8, 2>5>8) = -1/4.
  const auto f = with_state(paper_example(), Vector::Unit(3, 0));
  const auto v = check_minimal(f);
  EXPECT_FALSE(v.pass);
  ASSERT_TRUE(v.worst.has_value());
  EXPECT_GE(v.worst->magnitude, 0.25 - 1e-12);
  const auto r = check_sum_rule(f, graining({{{0, 1}}, {{0}, {1}, {2}}, {{0}, {1}, {2}}}));
  EXPECT_NEAR(r.max_abs_residual, 0.25, 1e-12);
}

TEST(CheckMinimal, SizeOneSlotsVacuous) {
  const auto f = random_family(3, std::vector<std::size_t>{1, 1}, 2);
  const auto v = check_minimal(f);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.checked, 0u);
}

TEST(CheckWeak, ExampleFailsWithFourWitnesses) {
  const auto f = paper_example();
  const auto v = check_weak(f);
  EXPECT_FALSE(v.pass);
  ASSERT_EQ(v.violations.size(), 4u);
  std::map<std::pair<Branch, Branch>, double> values;
  for (const auto& w : v.violations) values[*w.pair] = w.value;
  EXPECT_NEAR(values.at({jkf(1, 3, 6), jkf(2, 4, 6)}), 1.0 / 16, 1e-12);
  EXPECT_NEAR(values.at({jkf(1, 4, 6), jkf(2, 3, 6)}), -1.0 / 16, 1e-12);
  EXPECT_NEAR(values.at({jkf(1, 3, 7), jkf(2, 4, 7)}), -1.0 / 16, 1e-12);
  EXPECT_NEAR(values.at({jkf(1, 4, 7), jkf(2, 3, 7)}), 1.0 / 16, 1e-12);
  EXPECT_NEAR(v.worst->magnitude, 1.0 / 16, 1e-12);
  EXPECT_EQ(v.worst->pair->first, jkf(1, 3, 6));
}

TEST(CheckWeak, RestrictedExamplePasses) {
  const auto paper = paper_example();
  const HistoryFamily f(paper.initial(), paper.times(), std::vector<Branch>{jkf(1, 5, 8), jkf(2, 5, 8)});
  EXPECT_TRUE(check_weak(f).pass);
  // The cross term is i/4: weak but not medium.
  EXPECT_NEAR(std::abs(decoherence_functional(f, jkf(1, 5, 8), jkf(2, 5, 8)) - Complex(0, 0.25)), 0.0, 1e-12);
  EXPECT_FALSE(check_medium(f).pass);
}

TEST(CheckMedium, ExampleFails) { EXPECT_FALSE(check_medium(paper_example()).pass); }

TEST(CheckMedium, OrthogonalChainImagesPass) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = gen::medium_family(seed, seed % 2 == 0);
    EXPECT_TRUE(check_medium(f).pass) << seed;
    EXPECT_TRUE(check_weak(f).pass) << seed;
  }
}

TEST(CheckMedium, SingleBranchVacuous) {
  const auto paper = paper_example();
  const HistoryFamily f(paper.initial(), paper.times(), std::vector<Branch>{jkf(1, 3, 6)});
  const auto v = check_medium(f);
  EXPECT_TRUE(v.pass);
  EXPECT_FALSE(v.worst.has_value());
}

TEST(HistorySumQuantity, ExampleValues) {
  const auto f = paper_example();
  const std::vector<Branch> straight_6{jkf(1, 3, 6), jkf(2, 4, 6)};
  const std::vector<Branch> straight_7{jkf(1, 3, 7), jkf(2, 4, 7)};
  const std::vector<Branch> crossed_6{jkf(1, 4, 6), jkf(2, 3, 6)};
  const std::vector<Branch> crossed_7{jkf(1, 4, 7), jkf(2, 3, 7)};
  EXPECT_NEAR(history_sum_quantity(f, straight_6), 0.25, 1e-12);
  EXPECT_NEAR(history_sum_quantity(f, straight_7), 0.0, 1e-12);
  EXPECT_NEAR(history_sum_quantity(f, crossed_6), 0.0, 1e-12);
  EXPECT_NEAR(history_sum_quantity(f, crossed_7), 0.25, 1e-12);
  EXPECT_THROW(history_sum_quantity(f, std::vector<Branch>{}), Error);
}

TEST(CheckHistorySumRule, ExampleValues) {
  const auto f = paper_example();
  const auto a = check_history_sum_rule(f, std::vector<Branch>{jkf(1, 3, 6), jkf(2, 4, 6)});
  EXPECT_NEAR(a.quantity, 0.25, 1e-12);
  EXPECT_NEAR(a.prob_sum, 0.125, 1e-12);
  EXPECT_NEAR(a.residual, 0.125, 1e-12);
  EXPECT_FALSE(a.pass);
  const auto b = check_history_sum_rule(f, std::vector<Branch>{jkf(1, 4, 6), jkf(2, 3, 6)});
  EXPECT_NEAR(b.quantity, 0.0, 1e-12);
  EXPECT_NEAR(b.prob_sum, 0.125, 1e-12);
  EXPECT_NEAR(b.residual, -0.125, 1e-12);
  EXPECT_FALSE(b.pass);
  const auto c = check_history_sum_rule(f, std::vector<Branch>{jkf(1, 5, 8)});
  EXPECT_NEAR(c.residual, 0.0, 1e-15);
  EXPECT_TRUE(c.pass);
  try {
    check_history_sum_rule(f, std::vector<Branch>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySet);
  }
}

TEST(SwapSymmetry, ProjectionRulesUnchangedHistoryRulesExchange) {
  const auto f = paper_example();
  const auto s = swap_67(f);
  const auto grainings = enumerate_grainings(f);
  ASSERT_EQ(grainings.size(), 49u);
  // Swapping the first two final projectors maps graining g of f onto the
  // graining of s with the final partition relabelled; compare by coarse
  // branch labels.
  for (const auto& g : grainings) {
    const auto rf = check_sum_rule(f, g);
    std::vector<Partition> parts = g.partitions();
    for (auto& block : parts[2]) {
      for (auto& i : block) i = i == 0 ? 1 : (i == 1 ? 0 : i);
    }
    const CoarseGraining gs(parts);
    const auto rs = check_sum_rule(s, gs);
    ASSERT_EQ(rf.rows.size(), rs.rows.size());
    const auto cf = coarse_family(f, g);
    const auto cs = coarse_family(s, gs);
    std::map<std::string, std::pair<double, double>> by_name;
    for (const auto& row : rf.rows) by_name[canonical_name(cf, row.coarse_branch)] = {row.coarse_probability, row.fine_sum};
    for (const auto& row : rs.rows) {
      const std::string name = canonical_name(cs, row.coarse_branch);
      ASSERT_TRUE(by_name.count(name)) << name;
      EXPECT_NEAR(by_name[name].first, row.coarse_probability, 1e-12) << name;
      EXPECT_NEAR(by_name[name].second, row.fine_sum, 1e-12) << name;
    }
    EXPECT_NEAR(rf.max_abs_residual, rs.max_abs_residual, 1e-12);
  }
  EXPECT_EQ(check_minimal(f).pass, check_minimal(s).pass);

  // In s, index 0 of the final slot holds |7>.
  const std::vector<Branch> straight_f0{jkf(1, 3, 6), jkf(2, 4, 6)};
  const std::vector<Branch> crossed_f0{jkf(1, 4, 6), jkf(2, 3, 6)};
  EXPECT_NEAR(history_sum_quantity(f, straight_f0), 0.25, 1e-12);
  EXPECT_NEAR(history_sum_quantity(s, straight_f0), 0.0, 1e-12);
  EXPECT_NEAR(history_sum_quantity(f, crossed_f0), 0.0, 1e-12);
  EXPECT_NEAR(history_sum_quantity(s, crossed_f0), 0.25, 1e-12);
}

}  // namespace
}  // namespace decohere
