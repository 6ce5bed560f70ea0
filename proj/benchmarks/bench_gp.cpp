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

#include "gnas/gp.hpp"
#include "gnas/search.hpp"

namespace {

using namespace gnas;

Matrix points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng = make_rng(seed, "bench/points");
  return Matrix::NullaryExpr(n, d, [&] { return standard_normal(rng); });
}

Vector targets(const Matrix& x) {
  return (x.rowwise().sum().array() / 4.0).tanh().matrix();
}

void BM_FitExact(benchmark::State& state) {
  const Matrix x = points(state.range(0), 56, 1);
  const Vector y = targets(x);
  GpConfig cfg;
  cfg.optimize = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit_gp(x, y, cfg).jitter());
}
BENCHMARK(BM_FitExact)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FitInducing(benchmark::State& state) {
  const Matrix x = points(state.range(0), 56, 1);
  const Vector y = targets(x);
  GpConfig cfg;
  cfg.optimize = false;
  cfg.force_inducing = true;
  cfg.num_inducing = 200;
  for (auto _ : state) benchmark::DoNotOptimize(fit_gp(x, y, cfg).jitter());
}
BENCHMARK(BM_FitInducing)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_FitWithHyperparameters(benchmark::State& state) {
  const Matrix x = points(500, 56, 1);
  const Vector y = targets(x);
  for (auto _ : state) benchmark::DoNotOptimize(fit_gp(x, y).jitter());
}
BENCHMARK(BM_FitWithHyperparameters)->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const Matrix x = points(1000, 56, 1);
  GpConfig cfg;
  cfg.optimize = false;
  const GpSurrogate gp = fit_gp(x, targets(x), cfg);
  const Matrix q = points(state.range(0), 56, 2);
  Vector mean, var;
  for (auto _ : state) {
    gp.predict(q, &mean, &var);
    benchmark::DoNotOptimize(mean.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictBatch)->Arg(10100)->Unit(benchmark::kMillisecond);

void BM_ProposeBatch(benchmark::State& state) {
  const Matrix x = points(500, 56, 1);
  GpConfig cfg;
  cfg.optimize = false;
  const GpSurrogate gp = fit_gp(x, targets(x), cfg);
  Rng rng = make_rng(3, "bench/propose");
  for (auto _ : state) {
    benchmark::DoNotOptimize(propose_batch(gp, 0.9, 50, rng).latents.size());
  }
}
BENCHMARK(BM_ProposeBatch)->Unit(benchmark::kMillisecond);

void BM_ExpectedImprovement(benchmark::State& state) {
  double m = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_improvement(m, 0.04, 0.12));
    m += 1e-9;
  }
}
BENCHMARK(BM_ExpectedImprovement);

}  // namespace
