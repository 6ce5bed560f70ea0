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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gnas/error.hpp"
#include "gnas/train.hpp"
#include "support.hpp"

using namespace gnas;

namespace {

std::vector<ArchitectureDag> sample_dags(const SearchSpace& s, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, "test/data");
  std::vector<ArchitectureDag> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_random(s, rng));
  return out;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.space = SearchSpace::enas_subset(3, 3);
  c.model = gnas::testing::small_config();
  c.epochs = 2;
  c.iterations = 3;
  c.batch_size = 4;
  c.learning_rate = 1e-2;
  c.seed = 11;
  return c;
}

const char* kMinimalConfig =
    "epochs = 5\niterations = 2\nbatch_size = 16\nlearning_rate = 0.001\n"
    "kl_weight = 0.5\nseed = 3\nencoder = async\nembedding = learnable\n";

}  // namespace

TEST_SUITE("train") {

TEST_CASE("diagonal Gaussian KL") {
  CHECK(kl_diag_gaussian(Vector::Zero(4), Vector::Zero(4)) == 0.0);
  Vector mu(2), lv(2);
  mu << 1.0, -2.0;
  lv << std::log(2.0), 0.0;
  // 0.5 * ((2 + 1 - 1 - ln 2) + (1 + 4 - 1 - 0))
  CHECK(kl_diag_gaussian(mu, lv) == doctest::Approx(0.5 * (2.0 - std::log(2.0) + 4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(kl_diag_gaussian(Vector::Zero(2), Vector::Zero(3)), ShapeMismatch);
}

TEST_CASE("batched ELBO equals the mean of per-DAG ELBOs") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  VaeModel model(s, gnas::testing::small_config(), 5);
  // Mixed node counts exercise the grouping.
  auto dags = sample_dags(s, 5, 1);
  dags.push_back(ArchitectureDag::create_unsized({3, 0, 4}, {{0, 1}, {1, 2}}, 3));
  dags.push_back(ArchitectureDag::create_unsized({3, 1, 2, 0, 1, 4},
                                                 {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, 3));
  std::vector<const ArchitectureDag*> batch;
  for (const auto& d : dags) batch.push_back(&d);

  Rng a = make_rng(9, "test/noise");
  model.zero_grad();
  const ElboTerms got = elbo_backward(model, batch, a, 0.3);
  Rng b = make_rng(9, "test/noise");
  ElboTerms want;
  for (const auto& d : dags) {
    const ElboTerms t = elbo_loss(model, d, b, 0.3);
    want.total += t.total / dags.size();
    want.recon += t.recon / dags.size();
    want.kl += t.kl / dags.size();
  }
  CHECK(got.total == doctest::Approx(want.total).epsilon(1e-10));
  CHECK(got.recon == doctest::Approx(want.recon).epsilon(1e-10));
  CHECK(got.kl == doctest::Approx(want.kl).epsilon(1e-10));
}

TEST_CASE("zero KL weight leaves the reconstruction term alone") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  VaeModel model(s, gnas::testing::small_config(), 2);
  const auto d = sample_dags(s, 1, 4).front();
  Rng rng = make_rng(1, "test/noise");
  const ElboTerms t = elbo_loss(model, d, rng, 0.0);
  CHECK(t.total == t.recon);
  CHECK(t.kl > 0.0);
}

TEST_CASE("ELBO gradients match finite differences") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  for (EncoderKind enc : {EncoderKind::kAsync, EncoderKind::kGcn}) {
    for (EmbeddingKind emb : {EmbeddingKind::kLearnable, EmbeddingKind::kOneHot}) {
      auto cfg = gnas::testing::small_config(enc, emb);
      cfg.gcn_activation = Activation::kTanh;
      VaeModel model(s, cfg, 21);
      const auto dags = sample_dags(s, 3, 8);
      std::vector<const ArchitectureDag*> batch;
      for (const auto& d : dags) batch.push_back(&d);
      const double beta = 0.7;

      model.zero_grad();
      Rng rng = make_rng(4, "test/noise");
      elbo_backward(model, batch, rng, beta);
      auto loss = [&] {
        Rng r = make_rng(4, "test/noise");
        double sum = 0.0;
        for (const auto& d : dags) sum += elbo_loss(model, d, r, beta).total;
        return sum / static_cast<double>(dags.size());
      };
      const auto params = gnas::testing::trainable_parameters(model);
      const GradCheckResult res = grad_check(loss, params);
      INFO(to_string(enc), " / ", to_string(emb), ": ", res.worst_parameter);
      CHECK(res.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("iterated training carries the embedding and re-draws the rest") {
  const TrainConfig cfg = tiny_config();
  const auto data = sample_dags(cfg.space, 8, 2);
  const IteratedResult r = iterated_training(cfg, data);
  REQUIRE(r.histories.size() == 3);
  REQUIRE(r.initial_embeddings.size() == 3);
  REQUIRE(r.embedding_snapshots.size() == 3);
  for (const auto& h : r.histories) CHECK(h.size() == 2);
  for (std::size_t t = 0; t + 1 < 3; ++t) {
    CHECK(r.initial_embeddings[t + 1] == r.embedding_snapshots[t]);
    CHECK(r.initial_embeddings[t] != r.embedding_snapshots[t]);
  }
  const VaeModel fresh(cfg.space, cfg.model, cfg.seed);
  CHECK(r.initial_embeddings[0] == fresh.embedding.weights.value);

  // A one-iteration run continued by hand reproduces the second round.
  TrainConfig one = cfg;
  one.iterations = 2;
  const IteratedResult r2 = iterated_training(one, data);
  CHECK(r2.embedding_snapshots[1] == r.embedding_snapshots[1]);
  CHECK(r2.histories[1].back().recon == r.histories[1].back().recon);
}

TEST_CASE("a single round matches train()") {
  TrainConfig cfg = tiny_config();
  const auto data = sample_dags(cfg.space, 8, 2);
  const TrainResult a = train(cfg, data);
  cfg.iterations = 1;
  const IteratedResult b = iterated_training(cfg, data);
  CHECK(a.model.embedding.weights.value == b.model.embedding.weights.value);
  CHECK(a.model.decoder.edge_mlp.layers.back().weight.value ==
        b.model.decoder.edge_mlp.layers.back().weight.value);
  REQUIRE(a.history.size() == b.histories[0].size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].recon == b.histories[0][i].recon);
  }
}

TEST_CASE("training lowers the loss on a small set") {
  TrainConfig cfg = tiny_config();
  cfg.iterations = 1;
  cfg.epochs = 30;
  const auto data = sample_dags(cfg.space, 8, 3);
  int calls = 0;
  const TrainResult r = train(cfg, data, [&](int it, const EpochStats& e) {
    CHECK(it == 1);
    CHECK(e.epoch == ++calls);
  });
  CHECK(calls == 30);
  CHECK(r.history.back().recon < r.history.front().recon);
}

TEST_CASE("training rejects bad input") {
  TrainConfig cfg = tiny_config();
  CHECK_THROWS_AS(train(cfg, std::vector<ArchitectureDag>{}), EmptyDataset);
  const auto wrong = sample_dags(SearchSpace::enas_subset(2, 3), 2, 1);
  CHECK_THROWS_AS(train(cfg, wrong), InvalidDag);
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = tiny_config();
  cfg.kl_weight = -1.0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
}

TEST_CASE("config parsing") {
  std::istringstream in(std::string("# comment\n") + kMinimalConfig + "hidden_dim = 64\n");
  const TrainConfig c = parse_train_config(in);
  CHECK(c.epochs == 5);
  CHECK(c.iterations == 2);
  CHECK(c.batch_size == 16);
  CHECK(c.learning_rate == 0.001);
  CHECK(c.kl_weight == 0.5);
  CHECK(c.seed == 3);
  CHECK(c.model.hidden_dim == 64);
  CHECK(c.model.latent_dim == 56);
  CHECK(c.space == SearchSpace::enas_default());

  std::istringstream again(format_train_config(c));
  const TrainConfig d = parse_train_config(again);
  CHECK(d.model == c.model);
  CHECK(d.space == c.space);
  CHECK(d.learning_rate == c.learning_rate);
  CHECK(d.seed == c.seed);
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      parse_train_config(in);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  std::string no_lr = kMinimalConfig;
  no_lr.erase(no_lr.find("learning_rate"), std::string("learning_rate = 0.001\n").size());
  CHECK(message(no_lr).find("learning_rate") != std::string::npos);
  CHECK(message(std::string(kMinimalConfig) + "bogus = 1\n").find("bogus") != std::string::npos);
  CHECK(message(std::string(kMinimalConfig) + "epochs = 2\n").find("epochs") != std::string::npos);
  std::string bad = kMinimalConfig;
  bad.replace(bad.find("16"), 2, "x6");
  CHECK(message(bad).find("batch_size") != std::string::npos);
  CHECK(message(std::string(kMinimalConfig) + "encoder2\n") != "");
}

TEST_CASE("train/eval split") {
  const SplitIndices s = split_indices(100, 0.9, 4);
  CHECK(s.train.size() == 90);
  CHECK(s.eval.size() == 10);
  std::vector<bool> seen(100, false);
  for (auto i : s.train) seen[i] = true;
  for (auto i : s.eval) seen[i] = true;
  for (bool b : seen) CHECK(b);
  const SplitIndices t = split_indices(100, 0.9, 4);
  CHECK(s.train == t.train);
  CHECK(split_indices(3, 0.01, 1).train.size() == 1);
  CHECK(split_indices(0, 0.5, 1).train.empty());
  CHECK_THROWS_AS(split_indices(5, 0.0, 1), ConfigError);
}

TEST_CASE("history CSV") {
  const std::vector<TrainHistory> h = {{{1, 2.5, 0.25}, {2, 2.0, 0.5}}, {{1, 1.5, 0.125}}};
  std::ostringstream out;
  write_history_csv(out, h);
  CHECK(out.str() == "epoch,recon_loss,kl\n1,2.5,0.25\n2,2,0.5\n3,1.5,0.125\n");
}

}  // TEST_SUITE
