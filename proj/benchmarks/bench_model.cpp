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

#include "gnas/decoder.hpp"
#include "gnas/encoder.hpp"
#include "gnas/train.hpp"

namespace {

using namespace gnas;

std::vector<ArchitectureDag> corpus(const SearchSpace& space, int n) {
  Rng rng = make_rng(1, "bench/data");
  std::vector<ArchitectureDag> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_random(space, rng));
  return out;
}

ModelConfig config_for(int hidden, EncoderKind kind) {
  ModelConfig mc;
  mc.hidden_dim = hidden;
  mc.encoder = kind;
  return mc;
}

void BM_Encode(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_default();
  const auto kind = state.range(1) ? EncoderKind::kGcn : EncoderKind::kAsync;
  const VaeModel model(space, config_for(static_cast<int>(state.range(0)), kind), 1);
  const auto dags = corpus(space, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(model, dags[i++ % dags.size()]).mu.data());
  }
}
BENCHMARK(BM_Encode)->Args({128, 0})->Args({128, 1})->Args({501, 0});

void BM_DecodeGreedy(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_default();
  const VaeModel model(space, config_for(static_cast<int>(state.range(0)), EncoderKind::kAsync), 1);
  Rng rng = make_rng(2, "bench/z");
  const Vector z = Vector::NullaryExpr(model.config().latent_dim, [&] { return standard_normal(rng); });
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(model, z, DecodeMode::kGreedy, rng).num_nodes());
  }
}
BENCHMARK(BM_DecodeGreedy)->Arg(128)->Arg(501);

// One optimizer-free ELBO forward/backward over a minibatch.
void BM_ElboBackward(benchmark::State& state) {
  const SearchSpace space = SearchSpace::enas_default();
  VaeModel model(space, config_for(128, EncoderKind::kAsync), 1);
  const auto dags = corpus(space, static_cast<int>(state.range(0)));
  std::vector<const ArchitectureDag*> batch;
  for (const auto& d : dags) batch.push_back(&d);
  Rng rng = make_rng(3, "bench/noise");
  for (auto _ : state) {
    model.zero_grad();
    benchmark::DoNotOptimize(elbo_backward(model, batch, rng, 0.005).total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ElboBackward)->Arg(1)->Arg(32);

}  // namespace
