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

#ifndef GNAS_TRAIN_HPP_
#define GNAS_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/model.hpp"
#include "gnas/nn.hpp"
#include "gnas/rng.hpp"

namespace gnas {

struct TrainConfig {
  int epochs = 100;        // per iteration
  int iterations = 4;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.9;
  // Warm-start every parameter, not just the embedding table, across
  // iterations.
  bool carry_all_weights = false;
  SearchSpace space = SearchSpace::enas_default();
  ModelConfig model;

  // Throws ConfigError when an invariant (N >= 1, T >= 1, beta >= 0, ...)
  // does not hold.
  void check() const;
};

// Flat key = value text, '#' comments. The training keys (epochs,
// iterations, batch_size, learning_rate, kl_weight, seed, encoder, embedding)
// are required; model and space keys fall back to defaults.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& config);

// KL(N(mu, diag(exp(log_var))) || N(0, I))
//   = 0.5 * sum_i (exp(log_var_i) + mu_i^2 - 1 - log_var_i)
double kl_diag_gaussian(const Vector& mu, const Vector& log_var);

struct ElboTerms {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

// One reparameterized sample: total = recon + kl_weight * kl.
ElboTerms elbo_loss(const VaeModel& model, const ArchitectureDag& dag, Rng& rng,
                    double kl_weight = 1.0);

// Batch-mean ELBO; accumulates its gradient into `model` (grads are not
// zeroed first). Draws the same noise as elbo_loss, row by row.
ElboTerms elbo_backward(VaeModel& model, std::span<const ArchitectureDag* const> batch,
                        Rng& rng, double kl_weight = 1.0);

struct EpochStats {
  int epoch = 0;
  double recon = 0.0;
  double kl = 0.0;
};
using TrainHistory = std::vector<EpochStats>;

using EpochCallback = std::function<void(int iteration, const EpochStats&)>;

struct TrainResult {
  VaeModel model;
  TrainHistory history;
};

struct IteratedResult {
  VaeModel model;
  std::vector<TrainHistory> histories;       // one per iteration
  std::vector<Matrix> initial_embeddings;    // table at the start of iteration t
  std::vector<Matrix> embedding_snapshots;   // table at the end of iteration t
};

// Minibatch Adam for config.epochs epochs. Throws EmptyDataset.
TrainResult train(const TrainConfig& config, std::span<const ArchitectureDag> train_set,
                  const EpochCallback& on_epoch = {});

// T rounds of full training. Round 1 draws the embedding from N(0, 1); later
// rounds re-draw every other weight from the same initialization stream and
// warm-start the embedding from the previous round's final table. Every round
// sees the same minibatch order.
IteratedResult iterated_training(const TrainConfig& config,
                                 std::span<const ArchitectureDag> train_set,
                                 const EpochCallback& on_epoch = {});

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

// Seeded shuffle, then the first round(n * fraction) indices (at least one
// when n > 0) go to training.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

// "epoch,recon_loss,kl"; epochs numbered consecutively across iterations.
void write_history_csv(std::ostream& out, std::span<const TrainHistory> histories);

}  // namespace gnas

#endif  // GNAS_TRAIN_HPP_
