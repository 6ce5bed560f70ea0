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

#include "gnas/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "gnas/error.hpp"

namespace gnas {
namespace {

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

// Sum of message rows over an ascending predecessor list.
Eigen::RowVectorXd sum_messages(const std::vector<Matrix>& messages,
                                std::span<const int> preds, Eigen::Index row,
                                Eigen::Index hidden) {
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(hidden);
  for (int k : preds) s += messages[static_cast<std::size_t>(k)].row(row);
  return s;
}

void insert_sorted(std::vector<int>& v, int x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

int choose_type(const Eigen::RowVectorXd& logits, int input_type, DecodeMode mode,
                Rng& rng) {
  const Eigen::Index count = logits.size();
  if (mode == DecodeMode::kGreedy) {
    int best = -1;
    for (Eigen::Index i = 0; i < count; ++i) {
      if (i == input_type) continue;
      if (best < 0 || logits(i) > logits(best)) best = static_cast<int>(i);
    }
    return best;
  }
  double mx = -INFINITY;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (i != input_type) mx = std::max(mx, logits(i));
  }
  Eigen::RowVectorXd p(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    p(i) = i == input_type ? 0.0 : std::exp(logits(i) - mx);
  }
  const double u = uniform01(rng) * p.sum();
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (p(i) <= 0.0) continue;
    acc += p(i);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

ArchitectureDag decode(const VaeModel& model, const Vector& z, DecodeMode mode, Rng& rng,
                       int max_nodes) {
  const auto& space = model.space();
  const auto& dec = model.decoder;
  const int hidden = model.config().hidden_dim;
  if (z.size() != model.config().latent_dim) {
    throw ShapeMismatch("latent vector has size " + std::to_string(z.size()) +
                        ", expected " + std::to_string(model.config().latent_dim));
  }
  if (max_nodes <= 0) max_nodes = space.num_nodes();
  max_nodes = std::max(max_nodes, 2);
  const bool score_all = model.config().score_input_edges;
  const int input_type = space.input_type();
  const int output_type = space.output_type();

  std::vector<int> types{input_type};
  std::vector<Edge> edges;
  std::vector<Matrix> states;
  std::vector<Matrix> messages;

  const Matrix h_init = dec.init_state.forward(z.transpose());
  Matrix e = model.embedding.embed(input_type).transpose();
  Matrix h = dec.gru.forward(e, h_init);
  messages.push_back(dec.message.forward(concat_cols(h, e)));
  states.push_back(std::move(h));

  for (int t = 1;; ++t) {
    int type = output_type;
    if (t < max_nodes - 1) {
      const Matrix logits = dec.type_mlp.forward(states.back());
      type = choose_type(logits.row(0), input_type, mode, rng);
    }
    types.push_back(type);
    if (type == output_type) break;

    e = model.embedding.embed(type).transpose();
    std::vector<int> preds;
    if (!score_all && t == 1) preds.push_back(0);
    h = dec.gru.forward(e, sum_messages(messages, preds, 0, hidden));
    const int k_min = score_all ? 0 : 1;
    for (int k = t - 1; k >= k_min; --k) {
      const Matrix logit = dec.edge_mlp.forward(concat_cols(h, states[static_cast<std::size_t>(k)]));
      const double p = sigmoid(logit(0, 0));
      const bool add = mode == DecodeMode::kGreedy ? p > 0.5 : uniform01(rng) < p;
      if (!add) continue;
      insert_sorted(preds, k);
      h = dec.gru.forward(e, sum_messages(messages, preds, 0, hidden));
    }
    for (int k : preds) edges.push_back({k, t});
    messages.push_back(dec.message.forward(concat_cols(h, e)));
    states.push_back(std::move(h));
  }

  const int n = static_cast<int>(types.size());
  return ArchitectureDag::create_unsized(std::move(types),
                                         complete_loose_ends(n, std::move(edges)),
                                         space.num_operations());
}

DecoderPass::DecoderPass(const VaeModel& model, const Matrix& z,
                         std::span<const ArchitectureDag* const> targets)
    : targets_(targets.begin(), targets.end()), z_(z) {
  if (targets_.empty()) throw EmptyDataset("decoder batch is empty");
  n_ = targets_.front()->num_nodes();
  const auto batch = static_cast<Eigen::Index>(targets_.size());
  if (z.rows() != batch || z.cols() != model.config().latent_dim) {
    throw ShapeMismatch("latent batch shape does not match targets");
  }
  for (const auto* dag : targets_) {
    if (dag->num_nodes() != n_) throw ShapeMismatch("decoder batch mixes node counts");
    if (dag->num_operations() != model.space().num_operations()) {
      throw InvalidDag("target DAG uses a different operation set");
    }
    const auto report = validate(*dag);
    if (!report.is_valid) {
      throw InvalidDag("teacher forcing needs a valid target: " +
                       report.violations.front().describe());
    }
  }

  const auto& dec = model.decoder;
  const Eigen::Index hidden = model.config().hidden_dim;
  const bool score_all = model.config().score_input_edges;
  losses_.assign(targets_.size(), NllBreakdown{});

  init_state_ = dec.init_state.forward(z);
  input_types_.assign(targets_.size(), model.space().input_type());
  node0_embedded_ = model.embedding.lookup(input_types_);
  states_.assign(static_cast<std::size_t>(n_), Matrix());
  messages_.assign(static_cast<std::size_t>(n_), Matrix());
  states_[0] = dec.gru.forward(node0_embedded_, init_state_, &node0_gru_);
  messages_[0] = dec.message.forward(concat_cols(states_[0], node0_embedded_),
                                     &node0_message_cache_);

  steps_.assign(static_cast<std::size_t>(n_), Step{});
  for (int t = 1; t < n_; ++t) {
    Step& step = steps_[static_cast<std::size_t>(t)];
    step.types.resize(targets_.size());
    for (std::size_t b = 0; b < targets_.size(); ++b) step.types[b] = targets_[b]->op(t);

    // Node type, predicted from the previous node's state.
    const Matrix logits =
        dec.type_mlp.forward(states_[static_cast<std::size_t>(t - 1)], &step.type_cache);
    step.d_type_logits.resize(logits.rows(), logits.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      Eigen::RowVectorXd g;
      const double ce = softmax_cross_entropy(logits.row(b), step.types[static_cast<std::size_t>(b)], &g);
      step.d_type_logits.row(b) = g;
      losses_[static_cast<std::size_t>(b)].type_loss += ce;
    }
    if (t == n_ - 1) break;  // output node: loose ends only

    step.interior = true;
    step.embedded = model.embedding.lookup(step.types);
    if (!score_all && t == 1) step.initial_preds = {0};
    Matrix h_in = Matrix::Zero(batch, hidden);
    if (!step.initial_preds.empty()) h_in = messages_[0];
    Matrix h = dec.gru.forward(step.embedded, h_in, &step.initial_gru);

    std::vector<std::vector<int>> preds(targets_.size(), step.initial_preds);
    const int k_min = score_all ? 0 : 1;
    for (int k = t - 1; k >= k_min; --k) {
      Slot slot;
      slot.k = k;
      const Matrix logit =
          dec.edge_mlp.forward(concat_cols(h, states_[static_cast<std::size_t>(k)]), &slot.edge_cache);
      slot.d_logit.resize(batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const bool present = targets_[static_cast<std::size_t>(b)]->has_edge(k, t);
        double g = 0.0;
        losses_[static_cast<std::size_t>(b)].edge_loss +=
            bce_with_logits(logit(b, 0), present ? 1.0 : 0.0, &g);
        slot.d_logit(b) = g;
        if (present) slot.rows.push_back(b);
      }
      if (!slot.rows.empty()) {
        Matrix sub_in(static_cast<Eigen::Index>(slot.rows.size()), hidden);
        for (std::size_t i = 0; i < slot.rows.size(); ++i) {
          auto& p = preds[static_cast<std::size_t>(slot.rows[i])];
          insert_sorted(p, k);
          slot.preds.push_back(p);
          sub_in.row(static_cast<Eigen::Index>(i)) =
              sum_messages(messages_, p, slot.rows[i], hidden);
        }
        const Matrix sub_h =
            dec.gru.forward(gather_rows(step.embedded, slot.rows), sub_in, &slot.gru);
        for (std::size_t i = 0; i < slot.rows.size(); ++i) {
          h.row(slot.rows[i]) = sub_h.row(static_cast<Eigen::Index>(i));
        }
      }
      step.slots.push_back(std::move(slot));
    }
    messages_[static_cast<std::size_t>(t)] =
        dec.message.forward(concat_cols(h, step.embedded), &step.message_cache);
    states_[static_cast<std::size_t>(t)] = std::move(h);
  }

  for (auto& l : losses_) l.total = l.type_loss + l.edge_loss;
}

Matrix DecoderPass::backward(VaeModel& model, std::span<const double> weights) {
  auto& dec = model.decoder;
  const auto batch = static_cast<Eigen::Index>(targets_.size());
  const Eigen::Index hidden = model.config().hidden_dim;
  if (weights.size() != targets_.size()) throw ShapeMismatch("one weight per target required");
  const Eigen::Map<const Vector> w(weights.data(), batch);

  std::vector<Matrix> d_states(static_cast<std::size_t>(n_), Matrix::Zero(batch, hidden));
  std::vector<Matrix> d_messages(static_cast<std::size_t>(n_), Matrix::Zero(batch, hidden));

  for (int t = n_ - 1; t >= 1; --t) {
    Step& step = steps_[static_cast<std::size_t>(t)];
    if (step.interior) {
      const auto tt = static_cast<std::size_t>(t);
      Matrix d_embed = Matrix::Zero(batch, step.embedded.cols());
      const Matrix d_c = dec.message.backward(step.message_cache, d_messages[tt]);
      Matrix g = d_states[tt] + d_c.leftCols(hidden);
      d_embed += d_c.rightCols(d_c.cols() - hidden);

      for (auto it = step.slots.rbegin(); it != step.slots.rend(); ++it) {
        Slot& slot = *it;
        if (!slot.rows.empty()) {
          Matrix g_sub = gather_rows(g, slot.rows);
          for (Eigen::Index r : slot.rows) g.row(r).setZero();
          auto [d_x, d_in] = dec.gru.backward(slot.gru, g_sub);
          for (std::size_t i = 0; i < slot.rows.size(); ++i) {
            const Eigen::Index r = slot.rows[i];
            d_embed.row(r) += d_x.row(static_cast<Eigen::Index>(i));
            for (int k : slot.preds[i]) {
              d_messages[static_cast<std::size_t>(k)].row(r) += d_in.row(static_cast<Eigen::Index>(i));
            }
          }
        }
        const Matrix d_logit = (slot.d_logit.array() * w.array()).matrix();
        const Matrix d_edge_in = dec.edge_mlp.backward(slot.edge_cache, d_logit);
        g += d_edge_in.leftCols(hidden);
        d_states[static_cast<std::size_t>(slot.k)] += d_edge_in.rightCols(hidden);
      }

      auto [d_x, d_in] = dec.gru.backward(step.initial_gru, g);
      d_embed += d_x;
      if (!step.initial_preds.empty()) d_messages[0] += d_in;
      model.embedding.backward(step.types, d_embed);
    }
    const Matrix d_logits = w.asDiagonal() * step.d_type_logits;
    d_states[static_cast<std::size_t>(t - 1)] += dec.type_mlp.backward(step.type_cache, d_logits);
  }

  const Matrix d_c = dec.message.backward(node0_message_cache_, d_messages[0]);
  const Matrix d_h0 = d_states[0] + d_c.leftCols(hidden);
  Matrix d_embed0 = d_c.rightCols(d_c.cols() - hidden);
  auto [d_x0, d_init] = dec.gru.backward(node0_gru_, d_h0);
  d_embed0 += d_x0;
  model.embedding.backward(input_types_, d_embed0);

  // dz: init_state is affine in z.
  return dec.init_state.backward(z_, d_init);
}

NllBreakdown teacher_forced_nll(const VaeModel& model, const Vector& z,
                                const ArchitectureDag& target) {
  const ArchitectureDag* ptr = &target;
  DecoderPass pass(model, z.transpose(), std::span(&ptr, 1));
  return pass.losses().front();
}

}  // namespace gnas
