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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gnas/checkpoint.hpp"
#include "gnas/decoder.hpp"
#include "gnas/error.hpp"
#include "support.hpp"

using namespace gnas;

namespace {

std::vector<std::pair<std::string, Matrix>> tensors(const VaeModel& m) {
  std::vector<std::pair<std::string, Matrix>> out;
  m.visit_parameters([&](const std::string& name, const Parameter& p) {
    out.emplace_back(name, p.value);
  });
  return out;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("save and load are bit-exact") {
  auto cfg = gnas::testing::small_config(EncoderKind::kGcn, EmbeddingKind::kLearnable);
  cfg.gcn_activation = Activation::kTanh;
  cfg.score_input_edges = false;
  const VaeModel model(SearchSpace::enas_subset(4, 3), cfg, 17);
  gnas::testing::TempDir dir("ckpt");
  save_checkpoint(dir / "m.json", model, {{"epochs", "3"}});
  const Checkpoint ck = load_checkpoint(dir / "m.json");
  CHECK(ck.model.space() == model.space());
  CHECK(ck.model.config() == model.config());
  CHECK(ck.metadata.at("epochs") == "3");
  const auto a = tensors(model);
  const auto b = tensors(ck.model);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second == b[i].second);
  }

  Rng r1 = make_rng(1, "test/decode");
  Rng r2 = make_rng(1, "test/decode");
  const Vector z = gnas::testing::random_vector(cfg.latent_dim, r1);
  gnas::testing::random_vector(cfg.latent_dim, r2);
  CHECK(dags_equal(decode(model, z, DecodeMode::kStochastic, r1),
                   decode(ck.model, z, DecodeMode::kStochastic, r2)));
}

TEST_CASE("one-hot tables stay frozen after loading") {
  const VaeModel model(SearchSpace::enas_subset(2, 2),
                       gnas::testing::small_config(EncoderKind::kAsync, EmbeddingKind::kOneHot), 1);
  std::stringstream ss;
  write_checkpoint(ss, model);
  const Checkpoint ck = read_checkpoint(ss);
  CHECK_FALSE(ck.model.embedding.trainable());
  CHECK(ck.model.embedding.weights.value == Matrix::Identity(4, 4));
}

TEST_CASE("corrupt checkpoints are rejected") {
  const VaeModel model(SearchSpace::enas_subset(2, 2), gnas::testing::small_config(), 1);
  std::stringstream ss;
  write_checkpoint(ss, model);
  const std::string text = ss.str();
  auto load = [](const std::string& t) {
    std::istringstream in(t);
    return read_checkpoint(in);
  };
  CHECK_THROWS_AS(load(text.substr(0, text.size() / 2)), CheckpointError);
  CHECK_THROWS_AS(load("{}"), CheckpointError);
  std::string v2 = text;
  v2.replace(v2.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS_AS(load(v2), CheckpointError);
  std::string renamed = text;
  renamed.replace(renamed.find("encoder.mu.weight"), 17, "encoder.mu.wxight");
  CHECK_THROWS_AS(load(renamed), CheckpointError);
  gnas::testing::TempDir dir("ckpt");
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), Error);
}

}  // TEST_SUITE
