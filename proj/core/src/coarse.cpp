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

#include "decohere/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "decohere/errors.hpp"

namespace decohere {

// ---------------------------------------------------------------------------
// CoarseGraining

CoarseGraining::CoarseGraining(std::vector<Partition> per_time) : parts_(std::move(per_time)) {
  block_index_.resize(parts_.size());
  for (std::size_t t = 0; t < parts_.size(); ++t) {
    auto& part = parts_[t];
    std::set<std::size_t> seen;
    for (auto& block : part) {
      if (block.empty()) throw Error(ErrorCode::InvalidArgument, "coarse-graining has an empty block");
      std::sort(block.begin(), block.end());
      for (auto i : block) {
        if (!seen.insert(i).second) {
          throw Error(ErrorCode::InvalidArgument, "coarse-graining blocks overlap at index " + std::to_string(i));
        }
      }
    }
    std::sort(part.begin(), part.end(), [](const Block& a, const Block& b) { return a.front() < b.front(); });
    const std::size_t n = seen.empty() ? 0 : *seen.rbegin() + 1;
    block_index_[t].assign(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t b = 0; b < part.size(); ++b) {
      for (auto i : part[b]) block_index_[t][i] = b;
    }
  }
}

CoarseGraining CoarseGraining::identity(const HistoryFamily& f) {
  std::vector<Partition> parts;
  for (const auto& slot : f.times()) {
    Partition p;
    for (std::size_t i = 0; i < slot.size(); ++i) p.push_back({i});
    parts.push_back(std::move(p));
  }
  return CoarseGraining(std::move(parts));
}

bool CoarseGraining::is_identity() const noexcept {
  return std::all_of(parts_.begin(), parts_.end(), [](const Partition& p) {
    return std::all_of(p.begin(), p.end(), [](const Block& b) { return b.size() == 1; });
  });
}

void CoarseGraining::require_valid_for(const HistoryFamily& f) const {
  if (parts_.size() != f.num_times()) {
    throw Error(ErrorCode::InvalidArgument, "coarse-graining has the wrong number of times");
  }
  for (std::size_t t = 0; t < parts_.size(); ++t) {
    const std::size_t n = f.times()[t].size();
    std::size_t covered = 0;
    for (const auto& block : parts_[t]) {
      for (auto i : block) {
        if (i >= n) {
          throw Error(ErrorCode::InvalidArgument,
                      "coarse-graining index " + std::to_string(i) + " out of range at time " + std::to_string(t));
        }
      }
      covered += block.size();
    }
    if (covered != n) {
      throw Error(ErrorCode::InvalidArgument,
                  "coarse-graining does not cover every index at time " + std::to_string(t));
    }
  }
}

std::size_t CoarseGraining::block_of(std::size_t t, std::size_t index) const {
  const std::size_t b = block_index_.at(t).at(index);
  if (b == std::numeric_limits<std::size_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "index not covered by coarse-graining");
  }
  return b;
}

Branch CoarseGraining::coarsen(const Branch& fine) const {
  Branch out{std::vector<std::size_t>(fine.size())};
  for (std::size_t t = 0; t < fine.size(); ++t) out.indices[t] = block_of(t, fine.indices[t]);
  return out;
}

std::string describe(const HistoryFamily& f, const CoarseGraining& g) {
  std::ostringstream os;
  for (std::size_t t = 0; t < g.num_times(); ++t) {
    if (t) os << " | ";
    const auto& slot = f.times().at(t);
    os << slot.label() << ':';
    for (const auto& block : g.partitions()[t]) {
      os << '{';
      for (std::size_t i = 0; i < block.size(); ++i) {
        os << (i ? "," : "") << slot.projector_labels().at(block[i]);
      }
      os << '}';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Enumeration

std::uint64_t graining_count(const HistoryFamily& f) noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t n = 1;
  for (const auto& slot : f.times()) {
    const auto b = bell_number(slot.size());
    if (b != 0 && n > kMax / b) return kMax;
    n *= b;
  }
  return n - 1;
}

std::vector<CoarseGraining> enumerate_grainings(const HistoryFamily& f, std::size_t cap) {
  const auto count = graining_count(f);
  if (count > cap) {
    std::ostringstream os;
    os << count << " coarse-grainings exceed the cap of " << cap;
    throw Error(ErrorCode::TooManyGrainings, os.str());
  }
  std::vector<std::vector<Partition>> per_time;
  std::vector<std::size_t> sizes;
  for (const auto& slot : f.times()) {
    per_time.push_back(set_partitions(slot.size()));
    sizes.push_back(per_time.back().size());
  }
  std::vector<CoarseGraining> out;
  out.reserve(static_cast<std::size_t>(count));
  for_each_product_branch(sizes, [&](const Branch& choice) {
    std::vector<Partition> parts;
    parts.reserve(choice.size());
    bool identity = true;
    for (std::size_t t = 0; t < choice.size(); ++t) {
      // The all-singletons partition is last in each list.
      identity = identity && choice.indices[t] + 1 == sizes[t];
      parts.push_back(per_time[t][choice.indices[t]]);
    }
    if (!identity) out.emplace_back(std::move(parts));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Coarse families and projection sum rules

HistoryFamily coarse_family(const HistoryFamily& f, const CoarseGraining& g, const Tolerance& tol) {
  g.require_valid_for(f);
  std::vector<TimeSlot> slots;
  slots.reserve(f.num_times());
  for (std::size_t t = 0; t < f.num_times(); ++t) {
    const auto& fine = f.times()[t];
    std::vector<Projector> projectors;
    std::vector<std::string> labels;
    for (const auto& block : g.partitions()[t]) {
      if (block.size() == 1) {
        projectors.push_back(fine[block.front()]);
        labels.push_back(fine.projector_labels()[block.front()]);
        continue;
      }
      Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(f.dim()), static_cast<Eigen::Index>(f.dim()));
      std::string label;
      for (auto i : block) {
        sum += fine[i].matrix();
        if (!label.empty()) label += '+';
        label += fine.projector_labels()[i];
      }
      projectors.push_back(Projector::from_matrix(std::move(sum), tol));
      labels.push_back(std::move(label));
    }
    slots.emplace_back(fine.label(), std::move(projectors), std::move(labels));
  }

  std::optional<std::vector<Branch>> branches;
  if (f.explicit_branches()) {
    branches.emplace();
    std::set<Branch> seen;
    for (const auto& h : *f.explicit_branches()) {
      Branch c = g.coarsen(h);
      if (seen.insert(c).second) branches->push_back(std::move(c));
    }
  }
  return HistoryFamily(f.initial(), std::move(slots), std::move(branches));
}

namespace {

// Probabilities of every product branch, indexed in mixed radix (last time
// fastest), so a check over many grainings computes each fine value once.
class FineTable {
 public:
  explicit FineTable(const HistoryFamily& f) : sizes_(f.slot_sizes()) {
    const std::size_t n = f.product_size();
    if (n > kDefaultBranchCap) {
      std::ostringstream os;
      os << "family has " << n << " product branches, cap is " << kDefaultBranchCap;
      throw Error(ErrorCode::TooManyBranches, os.str());
    }
    std::vector<Branch> all;
    all.reserve(n);
    for_each_product_branch(sizes_, [&](const Branch& h) { all.push_back(h); });
    const auto images = chain_images(f, all);
    probs_.reserve(n);
    for (const auto& m : images) probs_.push_back(m.squaredNorm());
  }

  double operator[](const Branch& h) const {
    std::size_t idx = 0;
    for (std::size_t t = 0; t < sizes_.size(); ++t) idx = idx * sizes_[t] + h.indices[t];
    return probs_[idx];
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> probs_;
};

SumRuleReport sum_rule_with_table(const HistoryFamily& f, const CoarseGraining& g, const FineTable& fine,
                                  const Tolerance& tol) {
  const HistoryFamily cf = coarse_family(f, g, tol);
  SumRuleReport report{g, {}, 0.0, true};
  const auto coarse = cf.branches();
  const auto images = chain_images(cf, coarse);
  report.rows.reserve(coarse.size());
  for (std::size_t r = 0; r < coarse.size(); ++r) {
    SumRuleRow row;
    row.coarse_branch = coarse[r];
    row.coarse_probability = images[r].squaredNorm();
    std::vector<std::size_t> cell_sizes;
    for (std::size_t t = 0; t < f.num_times(); ++t) {
      cell_sizes.push_back(g.partitions()[t][coarse[r].indices[t]].size());
    }
    for_each_product_branch(cell_sizes, [&](const Branch& pick) {
      Branch h{std::vector<std::size_t>(pick.size())};
      for (std::size_t t = 0; t < pick.size(); ++t) {
        h.indices[t] = g.partitions()[t][coarse[r].indices[t]][pick.indices[t]];
      }
      row.fine_sum += fine[h];
      row.fine_branches.push_back(std::move(h));
    });
    row.residual = row.coarse_probability - row.fine_sum;
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(row.residual));
    report.rows.push_back(std::move(row));
  }
  report.pass = report.max_abs_residual <= tol.eps_zero;
  return report;
}

double worst_signed_residual(const SumRuleReport& r) {
  double value = 0.0;
  for (const auto& row : r.rows) {
    if (std::abs(row.residual) > std::abs(value)) value = row.residual;
  }
  return value;
}

}  // namespace

SumRuleReport check_sum_rule(const HistoryFamily& f, const CoarseGraining& g, const Tolerance& tol) {
  g.require_valid_for(f);
  return sum_rule_with_table(f, g, FineTable(f), tol);
}

std::string_view to_string(DecoherenceLevel level) noexcept {
  switch (level) {
    case DecoherenceLevel::minimal: return "minimal";
    case DecoherenceLevel::weak: return "weak";
    case DecoherenceLevel::medium: return "medium";
  }
  return "unknown";
}

DecoherenceVerdict check_minimal(const HistoryFamily& f, const Tolerance& tol, std::size_t cap) {
  const auto grainings = enumerate_grainings(f, cap);
  const FineTable fine(f);
  DecoherenceVerdict verdict;
  verdict.level = DecoherenceLevel::minimal;
  verdict.checked = grainings.size();
  for (const auto& g : grainings) {
    const auto report = sum_rule_with_table(f, g, fine, tol);
    Witness w{g, std::nullopt, worst_signed_residual(report), report.max_abs_residual};
    if (!report.pass) verdict.violations.push_back(w);
    // Strict comparison keeps the earliest graining among equal maxima.
    if (!verdict.worst || w.magnitude > verdict.worst->magnitude) verdict.worst = std::move(w);
  }
  verdict.pass = verdict.violations.empty();
  return verdict;
}

namespace {

template <typename Measure>
DecoherenceVerdict pairwise_verdict(const HistoryFamily& f, DecoherenceLevel level, const Tolerance& tol,
                                    Measure measure) {
  const auto branches = f.branches();
  const auto images = chain_images(f, branches);
  DecoherenceVerdict verdict;
  verdict.level = level;
  for (std::size_t a = 0; a < branches.size(); ++a) {
    for (std::size_t b = a + 1; b < branches.size(); ++b) {
      const Complex d = image_overlap(images[a], images[b]);
      const double value = measure(d);
      Witness w{std::nullopt, std::make_pair(branches[a], branches[b]), value, std::abs(value)};
      ++verdict.checked;
      if (w.magnitude > tol.eps_zero) verdict.violations.push_back(w);
      if (!verdict.worst || w.magnitude > verdict.worst->magnitude) verdict.worst = std::move(w);
    }
  }
  verdict.pass = verdict.violations.empty();
  return verdict;
}

}  // namespace

DecoherenceVerdict check_weak(const HistoryFamily& f, const Tolerance& tol) {
  return pairwise_verdict(f, DecoherenceLevel::weak, tol, [](Complex d) { return d.real(); });
}

DecoherenceVerdict check_medium(const HistoryFamily& f, const Tolerance& tol) {
  return pairwise_verdict(f, DecoherenceLevel::medium, tol, [](Complex d) { return std::abs(d); });
}

DecoherenceVerdict check_level(const HistoryFamily& f, DecoherenceLevel level, const Tolerance& tol) {
  switch (level) {
    case DecoherenceLevel::minimal: return check_minimal(f, tol);
    case DecoherenceLevel::weak: return check_weak(f, tol);
    case DecoherenceLevel::medium: return check_medium(f, tol);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown decoherence level");
}

// ---------------------------------------------------------------------------
// History sum rules

namespace {

std::vector<Branch> distinct_branches(const HistoryFamily& f, std::span<const Branch> set) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "history set is empty");
  std::vector<Branch> out;
  std::set<Branch> seen;
  for (const auto& h : set) {
    f.require_valid(h);
    if (seen.insert(h).second) out.push_back(h);
  }
  return out;
}

}  // namespace

double history_sum_quantity(const HistoryFamily& f, std::span<const Branch> set) {
  const auto hs = distinct_branches(f, set);
  const auto images = chain_images(f, hs);
  Matrix sum = Matrix::Zero(images.front().rows(), images.front().cols());
  for (const auto& m : images) sum += m;
  return sum.squaredNorm();
}

HistorySumRule check_history_sum_rule(const HistoryFamily& f, std::span<const Branch> set, const Tolerance& tol) {
  const auto hs = distinct_branches(f, set);
  HistorySumRule out;
  out.quantity = history_sum_quantity(f, hs);
  for (const auto& h : hs) out.prob_sum += probability(f, h, tol);
  out.residual = out.quantity - out.prob_sum;
  out.pass = std::abs(out.residual) <= tol.eps_zero;
  return out;
}

}  // namespace decohere
