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

// Trajectory graphs: one column per time plus an initial column, a node per
// projector, and an edge for each consecutive pair used by a listed branch.

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "decohere/family.hpp"

namespace decohere {

struct GraphNode {
  /// 0 is the initial column; column k holds the projectors of time k-1.
  std::size_t column = 0;
  std::size_t slot = 0;
  std::string label;
  /// DOT identifier: "t0" for the initial node, "t<k>_s<j>" otherwise.
  std::string id;
};

struct TrajectoryGraph {
  std::vector<GraphNode> nodes;
  /// Node indices per column, slot order.
  std::vector<std::vector<std::size_t>> columns;
  /// Sorted, deduplicated (from, to) node-index pairs.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Expands ALL up to `cap` branches (TooManyBranches beyond it).
TrajectoryGraph build_graph(const HistoryFamily& f, const std::string& initial_label = "initial",
                            std::size_t cap = kDefaultBranchCap);

/// Deterministic DOT digraph with one rank=same subgraph per column.
std::string to_dot(const TrajectoryGraph& g);

/// For each final-slot index, how many listed branches ending there have
/// a nonzero amplitude (norm of C_h applied to the state above eps_zero).
/// Throws NonRankOneSlot if any projector has rank other than 1.
std::map<std::size_t, std::size_t> two_path_counts(const HistoryFamily& f, const Tolerance& tol = {});

/// Total probability that rank-1 projector `p` holds at time `t1` and again
/// at time `t2`, summed over the fine intermediate branches, with every
/// time outside [t1, t2] merged into a single block. Throws
/// PreconditionViolated unless t1 < t2, p is a member of both slots and of
/// no slot in between, and p has rank 1.
double recurrence_sum(const HistoryFamily& f, const Projector& p, std::size_t t1, std::size_t t2,
                      const Tolerance& tol = {});

}  // namespace decohere
