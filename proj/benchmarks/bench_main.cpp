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

#include <benchmark/benchmark.h>

#include <array>

#include "decohere/coarse.hpp"
#include "decohere/family.hpp"
#include "decohere/lp.hpp"
#include "decohere/search.hpp"

namespace {

using namespace decohere;

HistoryFamily sized_family(std::size_t dim) {
  const std::array<std::size_t, 3> slots{dim, dim, dim};
  return random_family(dim, slots, 7);
}

void BM_DecoherenceMatrix(benchmark::State& state) {
  const auto f = sized_family(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(decoherence_matrix(f));
  state.SetLabel(std::to_string(f.branches().size()) + " branches");
}
BENCHMARK(BM_DecoherenceMatrix)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

void BM_CheckMinimalExample(benchmark::State& state) {
  const auto f = paper_example();
  for (auto _ : state) benchmark::DoNotOptimize(check_minimal(f));
}
BENCHMARK(BM_CheckMinimalExample);

void BM_CheckMinimal(benchmark::State& state) {
  const auto f = sized_family(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_minimal(f));
  state.SetLabel(std::to_string(graining_count(f)) + " grainings");
}
BENCHMARK(BM_CheckMinimal)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LpReport(benchmark::State& state) {
  const auto f = paper_example();
  for (auto _ : state) benchmark::DoNotOptimize(lp_report(f));
}
BENCHMARK(BM_LpReport);

void BM_SampleBranches(benchmark::State& state) {
  const auto f = paper_example();
  for (auto _ : state) benchmark::DoNotOptimize(sample_branches(f, 100'000, 1));
}
BENCHMARK(BM_SampleBranches)->Unit(benchmark::kMillisecond);

void BM_Search(benchmark::State& state) {
  SearchParams p;
  p.seed = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    const auto r = search_minimal_not_weak(p);
    state.counters["evaluations"] = static_cast<double>(r.evaluations_used);
    state.counters["found"] = r.found ? 1.0 : 0.0;
  }
}
BENCHMARK(BM_Search)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
