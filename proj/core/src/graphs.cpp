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

#include "decohere/graphs.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "decohere/errors.hpp"

namespace decohere {

TrajectoryGraph build_graph(const HistoryFamily& f, const std::string& initial_label, std::size_t cap) {
  TrajectoryGraph g;
  g.nodes.push_back({0, 0, initial_label, "t0"});
  g.columns.push_back({0});
  for (std::size_t t = 0; t < f.num_times(); ++t) {
    const auto& slot = f.times()[t];
    std::vector<std::size_t> column;
    for (std::size_t j = 0; j < slot.size(); ++j) {
      column.push_back(g.nodes.size());
      g.nodes.push_back({t + 1, j, slot.projector_labels()[j], "t" + std::to_string(t + 1) + "_s" + std::to_string(j)});
    }
    g.columns.push_back(std::move(column));
  }
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& h : f.branches(cap)) {
    std::size_t prev = 0;
    for (std::size_t t = 0; t < h.size(); ++t) {
      const std::size_t node = g.columns[t + 1][h.indices[t]];
      edges.emplace(prev, node);
      prev = node;
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_dot(const TrajectoryGraph& g) {
  std::ostringstream os;
  os << "digraph trajectories {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=circle];\n";
  for (std::size_t c = 0; c < g.columns.size(); ++c) {
    os << "  subgraph col_" << c << " {\n    rank=same;\n";
    for (auto n : g.columns[c]) {
      os << "    " << g.nodes[n].id << " [label=" << dot_quote(g.nodes[n].label) << "];\n";
    }
    os << "  }\n";
  }
  for (const auto& [from, to] : g.edges) {
    os << "  " << g.nodes[from].id << " -> " << g.nodes[to].id << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::map<std::size_t, std::size_t> two_path_counts(const HistoryFamily& f, const Tolerance& tol) {
  for (const auto& slot : f.times()) {
    for (std::size_t j = 0; j < slot.size(); ++j) {
      if (slot[j].rank() != 1) {
        throw Error(ErrorCode::NonRankOneSlot, "projector '" + slot.projector_labels()[j] + "' at time '" +
                                                   slot.label() + "' has rank " + std::to_string(slot[j].rank()));
      }
    }
  }
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t a = 0; a < f.times().back().size(); ++a) counts[a] = 0;
  const auto branches = f.branches();
  const auto images = chain_images(f, branches);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (images[i].norm() > tol.eps_zero) ++counts[branches[i].indices.back()];
  }
  return counts;
}

namespace {

std::optional<std::size_t> find_member(const TimeSlot& slot, const Projector& p, double eps) {
  for (std::size_t j = 0; j < slot.size(); ++j) {
    if (max_abs(slot[j].matrix() - p.matrix()) <= eps) return j;
  }
  return std::nullopt;
}

}  // namespace

double recurrence_sum(const HistoryFamily& f, const Projector& p, std::size_t t1, std::size_t t2,
                      const Tolerance& tol) {
  if (!(t1 < t2) || t2 >= f.num_times()) {
    throw Error(ErrorCode::PreconditionViolated, "recurrence needs t1 < t2 < number of times");
  }
  if (p.rank() != 1 || p.dim() != f.dim()) {
    throw Error(ErrorCode::PreconditionViolated, "recurring projector must be rank 1 and match the family dimension");
  }
  if (!find_member(f.times()[t1], p, tol.eps_zero) || !find_member(f.times()[t2], p, tol.eps_zero)) {
    throw Error(ErrorCode::PreconditionViolated, "projector is not a member of both end slots");
  }
  std::vector<std::size_t> inner_sizes;
  for (std::size_t t = t1 + 1; t < t2; ++t) {
    if (find_member(f.times()[t], p, tol.eps_zero)) {
      throw Error(ErrorCode::PreconditionViolated,
                  "projector also occurs at intermediate time '" + f.times()[t].label() + "'");
    }
    inner_sizes.push_back(f.times()[t].size());
  }

  // Everything before t1 acts as one fixed operator on the state.
  Matrix before = f.initial().factor();
  for (std::size_t t = 0; t < t1; ++t) before = f.times()[t].total() * before;
  before = p.matrix() * before;
  Matrix after = p.matrix();
  for (std::size_t t = t2 + 1; t < f.num_times(); ++t) after = f.times()[t].total() * after;

  double sum = 0.0;
  for_each_product_branch(inner_sizes, [&](const Branch& inner) {
    Matrix m = before;
    for (std::size_t i = 0; i < inner.size(); ++i) m = f.times()[t1 + 1 + i][inner.indices[i]].matrix() * m;
    sum += (after * m).squaredNorm();
  });
  return sum;
}

}  // namespace decohere
