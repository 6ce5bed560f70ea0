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

#ifndef GNAS_DECODER_HPP_
#define GNAS_DECODER_HPP_

#include <span>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/model.hpp"
#include "gnas/nn.hpp"
#include "gnas/rng.hpp"

namespace gnas {

enum class DecodeMode { kGreedy, kStochastic };

// Autoregressive generation from a latent vector.
//
// Node 0 is the input type with state GRU(O(input), W z + b). At step t the
// type MLP reads the state of node t-1 (the input type is never emitted
// again); the new node starts from GRU(O(x_t), 0) and scans candidate
// predecessors k = t-1 down to 0 (down to 1 with edge (0, 1) forced when
// score_input_edges is off). Each accepted edge re-runs the GRU on the gated
// sum of the current predecessors. Generation stops on the output type or
// when the node budget is exhausted; loose ends are then wired to the output.
//
// `max_nodes` <= 0 means the search space's node count. Never throws for a
// well-shaped z; the result may be invalid.
ArchitectureDag decode(const VaeModel& model, const Vector& z, DecodeMode mode,
                       Rng& rng, int max_nodes = 0);

struct NllBreakdown {
  double total = 0.0;
  double type_loss = 0.0;  // node-type cross-entropy, nodes 1 .. n-1
  double edge_loss = 0.0;  // edge BCE over every scanned slot
};

// -log p(A, X | z) under teacher forcing. Throws InvalidDag.
NllBreakdown teacher_forced_nll(const VaeModel& model, const Vector& z,
                                const ArchitectureDag& target);

// Batched teacher-forced pass; every target must have the same node count.
class DecoderPass {
 public:
  DecoderPass(const VaeModel& model, const Matrix& z,
              std::span<const ArchitectureDag* const> targets);

  const std::vector<NllBreakdown>& losses() const { return losses_; }

  // Backpropagates sum_b weight[b] * nll_b; returns d/dz.
  Matrix backward(VaeModel& model, std::span<const double> weights);

 private:
  struct Slot {
    int k = 0;
    MlpCache edge_cache;
    Vector d_logit;                      // dBCE/dlogit per row
    std::vector<Eigen::Index> rows;      // rows that gained edge (k, t)
    std::vector<std::vector<int>> preds; // predecessor set after the update
    GruCache gru;
  };
  struct Step {
    std::vector<int> types;
    Matrix embedded;
    MlpCache type_cache;
    Matrix d_type_logits;               // per row
    bool interior = false;
    std::vector<int> initial_preds;     // {0} when edge (0, 1) is forced
    GruCache initial_gru;
    std::vector<Slot> slots;
    MessageCache message_cache;
  };

  std::vector<const ArchitectureDag*> targets_;
  int n_ = 0;
  Matrix z_;
  std::vector<int> input_types_;
  Matrix init_state_;
  GruCache node0_gru_;
  Matrix node0_embedded_;
  MessageCache node0_message_cache_;
  std::vector<Matrix> states_;    // final state per node
  std::vector<Matrix> messages_;  // message per node
  std::vector<Step> steps_;       // index t (steps_[0] unused)
  std::vector<NllBreakdown> losses_;
};

}  // namespace gnas

#endif  // GNAS_DECODER_HPP_
