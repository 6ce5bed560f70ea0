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

#include "gnas/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "gnas/decoder.hpp"
#include "gnas/encoder.hpp"
#include "gnas/error.hpp"

namespace gnas {

void TrainConfig::check() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(kl_weight >= 0.0)) throw ConfigError("kl_weight must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1]");
  }
}

double kl_diag_gaussian(const Vector& mu, const Vector& log_var) {
  if (mu.size() != log_var.size()) throw ShapeMismatch("mu and log_var differ in size");
  return 0.5 * (log_var.array().exp() + mu.array().square() - 1.0 - log_var.array()).sum();
}

ElboTerms elbo_loss(const VaeModel& model, const ArchitectureDag& dag, Rng& rng,
                    double kl_weight) {
  const Posterior post = encode(model, dag);
  const Vector z = reparameterize(post.mu, post.log_var, rng);
  ElboTerms t;
  t.recon = teacher_forced_nll(model, z, dag).total;
  t.kl = kl_diag_gaussian(post.mu, post.log_var);
  t.total = t.recon + kl_weight * t.kl;
  return t;
}

ElboTerms elbo_backward(VaeModel& model, std::span<const ArchitectureDag* const> batch,
                        Rng& rng, double kl_weight) {
  if (batch.empty()) throw EmptyDataset("empty minibatch");
  const int l = model.config().latent_dim;
  const auto total = static_cast<Eigen::Index>(batch.size());

  // Noise is drawn in batch order before grouping so that it does not depend
  // on how the batch splits by node count.
  Matrix eps(total, l);
  for (Eigen::Index b = 0; b < total; ++b) {
    for (int j = 0; j < l; ++j) eps(b, j) = standard_normal(rng);
  }

  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index b = 0; b < total; ++b) groups[batch[b]->num_nodes()].push_back(b);

  const double w = 1.0 / static_cast<double>(total);
  ElboTerms sum;
  for (const auto& [n, rows] : groups) {
    (void)n;
    std::vector<const ArchitectureDag*> members;
    members.reserve(rows.size());
    for (Eigen::Index r : rows) members.push_back(batch[r]);
    const auto m = static_cast<Eigen::Index>(rows.size());

    EncoderPass enc(model, members);
    const Matrix& mu = enc.mu();
    const Matrix& lv = enc.log_var();
    Matrix e(m, l);
    for (Eigen::Index i = 0; i < m; ++i) e.row(i) = eps.row(rows[i]);
    const Matrix sigma = (0.5 * lv.array()).exp().matrix();
    const Matrix z = mu + sigma.cwiseProduct(e);

    DecoderPass dec(model, z, members);
    const std::vector<double> weights(rows.size(), w);
    const Matrix dz = dec.backward(model, weights);

    for (Eigen::Index i = 0; i < m; ++i) {
      sum.recon += dec.losses()[i].total;
      sum.kl += kl_diag_gaussian(mu.row(i).transpose(), lv.row(i).transpose());
    }

    // z = mu + exp(lv / 2) * eps; KL terms are averaged over the batch too.
    Matrix d_mu = dz + (w * kl_weight) * mu;
    Matrix d_lv = (0.5 * dz.array() * sigma.array() * e.array()).matrix() +
                  ((0.5 * w * kl_weight) * (lv.array().exp() - 1.0)).matrix();
    enc.backward(model, d_mu, d_lv);
  }
  sum.recon *= w;
  sum.kl *= w;
  sum.total = sum.recon + kl_weight * sum.kl;
  return sum;
}

namespace {

TrainHistory run_epochs(VaeModel& model, const TrainConfig& config,
                        std::span<const ArchitectureDag> data, int iteration,
                        const EpochCallback& on_epoch) {
  Rng shuffle_rng = make_rng(config.seed, "train/shuffle");
  Rng noise_rng = make_rng(config.seed, "train/noise");
  Adam adam(AdamOptions{.learning_rate = config.learning_rate});
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  history.reserve(static_cast<std::size_t>(config.epochs));
  std::vector<const ArchitectureDag*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double recon = 0.0;
    double kl = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&data[order[i]]);
      model.zero_grad();
      const ElboTerms terms = elbo_backward(model, batch, noise_rng, config.kl_weight);
      adam.step(model);
      const auto count = static_cast<double>(batch.size());
      recon += terms.recon * count;
      kl += terms.kl * count;
    }
    const auto n = static_cast<double>(data.size());
    EpochStats stats{epoch, recon / n, kl / n};
    history.push_back(stats);
    if (on_epoch) on_epoch(iteration, stats);
  }
  return history;
}

}  // namespace

IteratedResult iterated_training(const TrainConfig& config,
                                 std::span<const ArchitectureDag> train_set,
                                 const EpochCallback& on_epoch) {
  config.check();
  if (train_set.empty()) throw EmptyDataset("training set is empty");
  for (const auto& dag : train_set) {
    if (dag.num_nodes() != config.space.num_nodes()) {
      throw InvalidDag("training DAG node count does not match the search space");
    }
  }

  IteratedResult result{VaeModel(config.space, config.model, config.seed), {}, {}, {}};
  VaeModel& model = result.model;
  for (int t = 1; t <= config.iterations; ++t) {
    if (t > 1 && !config.carry_all_weights) {
      Rng rng = make_rng(config.seed, "init/weights");
      model.init_non_embedding(rng);
    }
    result.initial_embeddings.push_back(model.embedding.weights.value);
    result.histories.push_back(run_epochs(model, config, train_set, t, on_epoch));
    result.embedding_snapshots.push_back(model.embedding.weights.value);
  }
  model.zero_grad();
  return result;
}

TrainResult train(const TrainConfig& config, std::span<const ArchitectureDag> train_set,
                  const EpochCallback& on_epoch) {
  TrainConfig single = config;
  single.iterations = 1;
  IteratedResult r = iterated_training(single, train_set, on_epoch);
  return TrainResult{std::move(r.model), std::move(r.histories.front())};
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, "data/split");
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n > 0) k = std::clamp<std::size_t>(k, 1, n);
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  s.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  return s;
}

void write_history_csv(std::ostream& out, std::span<const TrainHistory> histories) {
  out << "epoch,recon_loss,kl\n";
  int epoch = 0;
  char buf[96];
  for (const auto& h : histories) {
    for (const auto& e : h) {
      std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", ++epoch, e.recon, e.kl);
      out << buf;
    }
  }
}

}  // namespace gnas
