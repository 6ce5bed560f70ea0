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

#ifndef GNAS_ENCODER_HPP_
#define GNAS_ENCODER_HPP_

#include <optional>
#include <span>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/model.hpp"
#include "gnas/nn.hpp"
#include "gnas/rng.hpp"

namespace gnas {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct Posterior {
  Vector mu;
  Vector log_var;
};

// A point of the latent space: posterior parameters plus, optionally, one
// reparameterized sample z = mu + exp(0.5 log_var) * eps.
struct LatentPoint {
  Vector mu;
  Vector log_var;
  std::optional<Vector> z;
  std::optional<Vector> eps;
};

// Asynchronous message passing in node-index order:
//   h_u^in = sum_{v -> u} sigmoid(g([h_v, O(x_v)])) * m([h_v, O(x_v)])
//   h_u    = GRU(O(x_u), h_u^in)
// The readout is the output node's state. `trace`, when given, receives the
// order in which node states were computed. Throws InvalidDag.
Posterior encode_async(const VaeModel& model, const ArchitectureDag& dag,
                       std::vector<int>* trace = nullptr);

// `gcn_layers` rounds of H <- act(A_hat H W) with A_hat the symmetric
// normalization of A + A^T + I, mean readout. Throws InvalidDag.
Posterior encode_gcn(const VaeModel& model, const ArchitectureDag& dag);

// Dispatches on model.config().encoder.
Posterior encode(const VaeModel& model, const ArchitectureDag& dag);

// Posterior means, one row per DAG.
Matrix encode_means(const VaeModel& model, std::span<const ArchitectureDag> dags);

Vector reparameterize(const Vector& mu, const Vector& log_var, Rng& rng,
                      Vector* eps_out = nullptr);
LatentPoint sample_latent(const Posterior& posterior, Rng& rng);

// Batched encoder forward pass that keeps what the backward pass needs.
// Every DAG of a batch must have the same node count.
class EncoderPass {
 public:
  EncoderPass(const VaeModel& model, std::span<const ArchitectureDag* const> batch,
              std::vector<int>* trace = nullptr);

  const Matrix& mu() const { return mu_; }
  const Matrix& log_var() const { return log_var_; }

  // Accumulates parameter gradients into `model`.
  void backward(VaeModel& model, const Matrix& d_mu, const Matrix& d_log_var);

 private:
  void forward_async(const VaeModel& model, std::vector<int>* trace);
  void forward_gcn(const VaeModel& model);
  void backward_async(VaeModel& model, const Matrix& d_readout);
  void backward_gcn(VaeModel& model, const Matrix& d_readout);

  std::vector<const ArchitectureDag*> batch_;
  EncoderKind kind_;
  int n_ = 0;

  // Async caches, indexed by node.
  std::vector<std::vector<int>> types_;
  std::vector<Matrix> embedded_;
  std::vector<GruCache> gru_caches_;
  std::vector<MessageCache> message_caches_;
  std::vector<Matrix> messages_;

  // GCN caches, rows are batch-major stacked nodes (b * n + u).
  std::vector<int> stacked_types_;
  std::vector<Matrix> adjacency_;      // per DAG, n x n
  std::vector<Matrix> propagated_;     // per layer: A_hat H_{l-1}
  std::vector<Matrix> pre_;            // per layer: pre-activation
  std::vector<Matrix> post_;           // per layer: activation output

  Matrix readout_;
  Matrix log_var_pre_;
  Matrix mu_;
  Matrix log_var_;
};

// Symmetric-normalized A + A^T + I.
Matrix gcn_normalized_adjacency(const ArchitectureDag& dag);

}  // namespace gnas

#endif  // GNAS_ENCODER_HPP_
