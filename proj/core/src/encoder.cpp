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

#include "gnas/encoder.hpp"

#include <cmath>

#include "gnas/error.hpp"

namespace gnas {
namespace {

void require_valid(const ArchitectureDag& dag) {
  const auto report = validate(dag);
  if (!report.is_valid) {
    throw InvalidDag("cannot encode an invalid DAG: " + report.violations.front().describe());
  }
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Posterior single(const EncoderPass& pass) {
  return {pass.mu().row(0).transpose(), pass.log_var().row(0).transpose()};
}

}  // namespace

Matrix gcn_normalized_adjacency(const ArchitectureDag& dag) {
  const int n = dag.num_nodes();
  Matrix a = Matrix::Identity(n, n);
  for (const Edge& e : dag.edges()) {
    a(e.src, e.dst) = 1.0;
    a(e.dst, e.src) = 1.0;
  }
  const Vector inv_sqrt_deg = a.rowwise().sum().array().rsqrt().matrix();
  return inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
}

EncoderPass::EncoderPass(const VaeModel& model,
                         std::span<const ArchitectureDag* const> batch,
                         std::vector<int>* trace)
    : batch_(batch.begin(), batch.end()), kind_(model.config().encoder) {
  if (batch_.empty()) throw EmptyDataset("encoder batch is empty");
  n_ = batch_.front()->num_nodes();
  for (const auto* dag : batch_) {
    if (dag->num_nodes() != n_) {
      throw ShapeMismatch("encoder batch mixes node counts");
    }
    require_valid(*dag);
  }
  if (kind_ == EncoderKind::kAsync) {
    forward_async(model, trace);
  } else {
    forward_gcn(model);
  }
  mu_ = model.mu_head.forward(readout_);
  log_var_pre_ = model.log_var_head.forward(readout_);
  log_var_ = log_var_pre_.cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
}

void EncoderPass::forward_async(const VaeModel& model, std::vector<int>* trace) {
  const auto batch = static_cast<Eigen::Index>(batch_.size());
  const int hidden = model.config().hidden_dim;
  const auto& enc = model.async_encoder;

  types_.assign(static_cast<std::size_t>(n_), std::vector<int>(batch_.size()));
  for (int u = 0; u < n_; ++u) {
    for (std::size_t b = 0; b < batch_.size(); ++b) {
      types_[static_cast<std::size_t>(u)][b] = batch_[b]->op(u);
    }
  }
  embedded_.resize(static_cast<std::size_t>(n_));
  gru_caches_.resize(static_cast<std::size_t>(n_));
  message_caches_.resize(static_cast<std::size_t>(n_));
  messages_.resize(static_cast<std::size_t>(n_));

  for (int u = 0; u < n_; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    embedded_[uu] = model.embedding.lookup(types_[uu]);
    Matrix h_in = Matrix::Zero(batch, hidden);
    for (std::size_t b = 0; b < batch_.size(); ++b) {
      // Predecessor lists are ascending, which fixes the summation order.
      for (int v : batch_[b]->predecessors(u)) {
        h_in.row(static_cast<Eigen::Index>(b)) +=
            messages_[static_cast<std::size_t>(v)].row(static_cast<Eigen::Index>(b));
      }
    }
    Matrix h = enc.gru.forward(embedded_[uu], h_in, &gru_caches_[uu]);
    if (trace) trace->push_back(u);
    if (u + 1 < n_) {
      messages_[uu] = enc.message.forward(concat_cols(h, embedded_[uu]), &message_caches_[uu]);
    } else {
      readout_ = std::move(h);
    }
  }
}

void EncoderPass::forward_gcn(const VaeModel& model) {
  const auto& layers = model.gcn_encoder.layers;
  const Activation act = model.config().gcn_activation;
  const auto batch = static_cast<Eigen::Index>(batch_.size());

  stacked_types_.clear();
  adjacency_.clear();
  for (const auto* dag : batch_) {
    for (int t : dag->ops()) stacked_types_.push_back(t);
    adjacency_.push_back(gcn_normalized_adjacency(*dag));
  }
  Matrix h = model.embedding.lookup(stacked_types_);

  propagated_.assign(layers.size(), Matrix());
  pre_.assign(layers.size(), Matrix());
  post_.assign(layers.size(), Matrix());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix p(h.rows(), h.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      p.middleRows(b * n_, n_).noalias() =
          adjacency_[static_cast<std::size_t>(b)] * h.middleRows(b * n_, n_);
    }
    pre_[l] = layers[l].forward(p);
    propagated_[l] = std::move(p);
    post_[l] = activate(act, pre_[l]);
    h = post_[l];
  }

  readout_.resize(batch, h.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    readout_.row(b) = h.middleRows(b * n_, n_).colwise().mean();
  }
}

void EncoderPass::backward(VaeModel& model, const Matrix& d_mu, const Matrix& d_log_var) {
  // Hard clamp: no gradient flows where log_var was clipped.
  const Matrix d_pre =
      ((log_var_pre_.array() >= kLogVarMin) && (log_var_pre_.array() <= kLogVarMax))
          .select(d_log_var, 0.0);
  Matrix d_readout = model.mu_head.backward(readout_, d_mu);
  d_readout += model.log_var_head.backward(readout_, d_pre);
  if (kind_ == EncoderKind::kAsync) {
    backward_async(model, d_readout);
  } else {
    backward_gcn(model, d_readout);
  }
}

void EncoderPass::backward_async(VaeModel& model, const Matrix& d_readout) {
  auto& enc = model.async_encoder;
  const Eigen::Index batch = d_readout.rows();
  const Eigen::Index hidden = d_readout.cols();

  std::vector<Matrix> d_messages(static_cast<std::size_t>(n_),
                                 Matrix::Zero(batch, hidden));
  for (int u = n_ - 1; u >= 0; --u) {
    const auto uu = static_cast<std::size_t>(u);
    Matrix d_h;
    Matrix d_embed = Matrix::Zero(batch, embedded_[uu].cols());
    if (u + 1 < n_) {
      const Matrix d_c = enc.message.backward(message_caches_[uu], d_messages[uu]);
      d_h = d_c.leftCols(hidden);
      d_embed += d_c.rightCols(d_c.cols() - hidden);
    } else {
      d_h = d_readout;
    }
    auto [d_x, d_h_in] = enc.gru.backward(gru_caches_[uu], d_h);
    d_embed += d_x;
    model.embedding.backward(types_[uu], d_embed);
    for (std::size_t b = 0; b < batch_.size(); ++b) {
      for (int v : batch_[b]->predecessors(u)) {
        d_messages[static_cast<std::size_t>(v)].row(static_cast<Eigen::Index>(b)) +=
            d_h_in.row(static_cast<Eigen::Index>(b));
      }
    }
  }
}

void EncoderPass::backward_gcn(VaeModel& model, const Matrix& d_readout) {
  auto& layers = model.gcn_encoder.layers;
  const Activation act = model.config().gcn_activation;
  const Eigen::Index batch = d_readout.rows();

  Matrix d_h(batch * n_, d_readout.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_h.middleRows(b * n_, n_) =
        (d_readout.row(b) / static_cast<double>(n_)).replicate(n_, 1);
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix d_pre = activate_backward(act, pre_[l], post_[l], d_h);
    const Matrix d_p = layers[l].backward(propagated_[l], d_pre);
    d_h.resize(d_p.rows(), d_p.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      d_h.middleRows(b * n_, n_).noalias() =
          adjacency_[static_cast<std::size_t>(b)].transpose() * d_p.middleRows(b * n_, n_);
    }
  }
  model.embedding.backward(stacked_types_, d_h);
}

Posterior encode_async(const VaeModel& model, const ArchitectureDag& dag,
                       std::vector<int>* trace) {
  if (model.config().encoder != EncoderKind::kAsync) {
    throw ConfigError("encode_async called on a model configured for the GCN encoder");
  }
  const ArchitectureDag* ptr = &dag;
  return single(EncoderPass(model, std::span(&ptr, 1), trace));
}

Posterior encode_gcn(const VaeModel& model, const ArchitectureDag& dag) {
  if (model.config().encoder != EncoderKind::kGcn) {
    throw ConfigError("encode_gcn called on a model configured for the async encoder");
  }
  const ArchitectureDag* ptr = &dag;
  return single(EncoderPass(model, std::span(&ptr, 1)));
}

Posterior encode(const VaeModel& model, const ArchitectureDag& dag) {
  const ArchitectureDag* ptr = &dag;
  return single(EncoderPass(model, std::span(&ptr, 1)));
}

Matrix encode_means(const VaeModel& model, std::span<const ArchitectureDag> dags) {
  Matrix out(static_cast<Eigen::Index>(dags.size()), model.config().latent_dim);
  for (std::size_t i = 0; i < dags.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = encode(model, dags[i]).mu.transpose();
  }
  return out;
}

Vector reparameterize(const Vector& mu, const Vector& log_var, Rng& rng, Vector* eps_out) {
  if (mu.size() != log_var.size()) throw ShapeMismatch("mu and log_var differ in size");
  Vector eps(mu.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = standard_normal(rng);
  Vector z = mu + ((0.5 * log_var.array()).exp() * eps.array()).matrix();
  if (eps_out) *eps_out = std::move(eps);
  return z;
}

LatentPoint sample_latent(const Posterior& posterior, Rng& rng) {
  LatentPoint p{posterior.mu, posterior.log_var, std::nullopt, std::nullopt};
  Vector eps;
  p.z = reparameterize(posterior.mu, posterior.log_var, rng, &eps);
  p.eps = std::move(eps);
  return p;
}

}  // namespace gnas
