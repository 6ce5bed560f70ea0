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

#ifndef GNAS_MODEL_HPP_
#define GNAS_MODEL_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include "gnas/dag.hpp"
#include "gnas/nn.hpp"

namespace gnas {

enum class EncoderKind { kAsync, kGcn };
enum class EmbeddingKind { kLearnable, kOneHot };

std::string to_string(EncoderKind kind);
std::string to_string(EmbeddingKind kind);
EncoderKind parse_encoder_kind(std::string_view text);
EmbeddingKind parse_embedding_kind(std::string_view text);

struct ModelConfig {
  int hidden_dim = 128;
  int latent_dim = 56;
  // Ignored for the one-hot table, whose width is the node-type count.
  int embed_dim = 3;
  int gcn_layers = 3;
  EncoderKind encoder = EncoderKind::kAsync;
  EmbeddingKind embedding = EmbeddingKind::kLearnable;
  Activation gcn_activation = Activation::kRelu;
  // Score every slot k = t-1 .. 0 during decoding. When false, edge (0, 1) is
  // added unconditionally and slots stop at k = 1.
  bool score_input_edges = true;

  bool operator==(const ModelConfig&) const = default;
};

struct AsyncEncoder {
  GruCell gru;
  GatedMessage message;
};

struct GcnEncoder {
  std::vector<Linear> layers;  // no bias: H <- act(A_hat H W)
};

struct Decoder {
  Linear init_state;  // z -> initial hidden state
  GruCell gru;
  GatedMessage message;
  Mlp type_mlp;       // h_{t-1} -> node-type logits
  Mlp edge_mlp;       // [h_t, h_k] -> edge logit
};

// Every encoder/decoder parameter plus the shared operation-embedding table.
// Both encoder backbones are held; `config().encoder` selects which one runs.
class VaeModel {
 public:
  VaeModel(SearchSpace space, ModelConfig config, std::uint64_t seed);

  const SearchSpace& space() const { return space_; }
  const ModelConfig& config() const { return config_; }
  int node_feature_dim() const { return embedding.dim(); }

  // Embedding from N(0, 1) (or the frozen one-hot table).
  void init_embedding(Rng& rng);
  // Uniform +-1/sqrt(fan_in) for everything except the embedding table.
  void init_non_embedding(Rng& rng);

  void zero_grad();
  void visit_parameters(const ParameterVisitor& fn);
  void visit_parameters(const ConstParameterVisitor& fn) const;
  std::size_t parameter_count() const;

  EmbeddingTable embedding;
  AsyncEncoder async_encoder;
  GcnEncoder gcn_encoder;
  Linear mu_head;
  Linear log_var_head;
  Decoder decoder;

 private:
  SearchSpace space_;
  ModelConfig config_;
};

}  // namespace gnas

#endif  // GNAS_MODEL_HPP_
