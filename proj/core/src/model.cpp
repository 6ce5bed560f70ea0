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

#include "gnas/model.hpp"

#include <array>

#include "gnas/error.hpp"

namespace gnas {

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::kAsync ? "async" : "gcn";
}

std::string to_string(EmbeddingKind kind) {
  return kind == EmbeddingKind::kLearnable ? "learnable" : "onehot";
}

EncoderKind parse_encoder_kind(std::string_view text) {
  if (text == "async") return EncoderKind::kAsync;
  if (text == "gcn") return EncoderKind::kGcn;
  throw ConfigError("unknown encoder kind '" + std::string(text) +
                    "' (expected async or gcn)");
}

EmbeddingKind parse_embedding_kind(std::string_view text) {
  if (text == "learnable") return EmbeddingKind::kLearnable;
  if (text == "onehot" || text == "one-hot" || text == "frozen-one-hot") {
    return EmbeddingKind::kOneHot;
  }
  throw ConfigError("unknown embedding kind '" + std::string(text) +
                    "' (expected learnable or onehot)");
}

VaeModel::VaeModel(SearchSpace space, ModelConfig config, std::uint64_t seed)
    : space_(std::move(space)), config_(config) {
  if (config_.hidden_dim < 1 || config_.latent_dim < 1 || config_.embed_dim < 1 ||
      config_.gcn_layers < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  const int types = space_.num_node_types();
  const int d = config_.embedding == EmbeddingKind::kOneHot ? types : config_.embed_dim;
  const int h = config_.hidden_dim;
  const int l = config_.latent_dim;

  embedding.weights = Parameter(types, d);
  async_encoder.gru = GruCell(d, h);
  async_encoder.message = GatedMessage(h + d, h);
  for (int i = 0; i < config_.gcn_layers; ++i) {
    gcn_encoder.layers.emplace_back(i == 0 ? d : h, h, false);
  }
  mu_head = Linear(h, l);
  log_var_head = Linear(h, l);

  decoder.init_state = Linear(l, h);
  decoder.gru = GruCell(d, h);
  decoder.message = GatedMessage(h + d, h);
  const std::array<int, 3> type_dims = {h, h, types};
  decoder.type_mlp = Mlp(type_dims, Activation::kRelu);
  const std::array<int, 3> edge_dims = {2 * h, h, 1};
  decoder.edge_mlp = Mlp(edge_dims, Activation::kRelu);

  Rng embed_rng = make_rng(seed, "init/embedding");
  init_embedding(embed_rng);
  Rng rng = make_rng(seed, "init/weights");
  init_non_embedding(rng);
}

void VaeModel::init_embedding(Rng& rng) {
  if (config_.embedding == EmbeddingKind::kOneHot) {
    embedding = EmbeddingTable::one_hot(space_.num_node_types());
  } else {
    embedding = EmbeddingTable::random_normal(space_.num_node_types(), config_.embed_dim, rng);
  }
}

void VaeModel::init_non_embedding(Rng& rng) {
  async_encoder.gru.init_uniform(rng);
  async_encoder.message.init_uniform(rng);
  for (auto& layer : gcn_encoder.layers) layer.init_uniform(rng);
  mu_head.init_uniform(rng);
  log_var_head.init_uniform(rng);
  decoder.init_state.init_uniform(rng);
  decoder.gru.init_uniform(rng);
  decoder.message.init_uniform(rng);
  decoder.type_mlp.init_uniform(rng);
  decoder.edge_mlp.init_uniform(rng);
}

void VaeModel::zero_grad() {
  visit_parameters([](const std::string&, Parameter& p) { p.zero_grad(); });
}

void VaeModel::visit_parameters(const ParameterVisitor& fn) {
  embedding.visit("embedding", fn);
  async_encoder.gru.visit("encoder.async.gru", fn);
  async_encoder.message.visit("encoder.async.message", fn);
  for (std::size_t i = 0; i < gcn_encoder.layers.size(); ++i) {
    gcn_encoder.layers[i].visit("encoder.gcn." + std::to_string(i), fn);
  }
  mu_head.visit("encoder.mu", fn);
  log_var_head.visit("encoder.log_var", fn);
  decoder.init_state.visit("decoder.init_state", fn);
  decoder.gru.visit("decoder.gru", fn);
  decoder.message.visit("decoder.message", fn);
  decoder.type_mlp.visit("decoder.type_mlp", fn);
  decoder.edge_mlp.visit("decoder.edge_mlp", fn);
}

void VaeModel::visit_parameters(const ConstParameterVisitor& fn) const {
  embedding.visit("embedding", fn);
  async_encoder.gru.visit("encoder.async.gru", fn);
  async_encoder.message.visit("encoder.async.message", fn);
  for (std::size_t i = 0; i < gcn_encoder.layers.size(); ++i) {
    gcn_encoder.layers[i].visit("encoder.gcn." + std::to_string(i), fn);
  }
  mu_head.visit("encoder.mu", fn);
  log_var_head.visit("encoder.log_var", fn);
  decoder.init_state.visit("decoder.init_state", fn);
  decoder.gru.visit("decoder.gru", fn);
  decoder.message.visit("decoder.message", fn);
  decoder.type_mlp.visit("decoder.type_mlp", fn);
  decoder.edge_mlp.visit("decoder.edge_mlp", fn);
}

std::size_t VaeModel::parameter_count() const {
  std::size_t count = 0;
  visit_parameters([&](const std::string&, const Parameter& p) {
    count += static_cast<std::size_t>(p.value.size());
  });
  return count;
}

}  // namespace gnas
