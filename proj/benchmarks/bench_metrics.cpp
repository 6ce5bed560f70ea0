// Copyright 2026 The gnas Authors.
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

#include <vector>

#include "gnas/metrics.hpp"
#include "gnas/search.hpp"

namespace {

using namespace gnas;

void BM_GraphMetrics(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_default();
  Rng rng = make_rng(1, "bench/metrics");
  std::vector<ArchitectureDag> dags;
  for (int i = 0; i < 256; ++i) dags.push_back(sample_random(space, rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& d = dags[i++ % dags.size()];
    benchmark::DoNotOptimize(avg_path_length(d) + clustering_coefficient(d));
  }
}
BENCHMARK(BM_GraphMetrics);

void BM_EnumerateSmallSpace(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_subset(4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_space(space).size());
}
BENCHMARK(BM_EnumerateSmallSpace)->Unit(benchmark::kMillisecond);

void BM_CorrelationReport(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_default();
  const OracleConfig oracle = OracleConfig::for_space(space);
  Rng rng = make_rng(2, "bench/report");
  std::vector<DagRecord> corpus;
  for (int i = 0; i < 10000; ++i) {
    auto d = sample_random(space, rng);
    const double p = synthetic_perf(oracle, d);
    corpus.push_back({std::move(d), p});
  }
  for (auto _ : state) benchmark::DoNotOptimize(correlation_report(corpus).bins.size());
}
BENCHMARK(BM_CorrelationReport)->Unit(benchmark::kMillisecond);

}  // namespace
