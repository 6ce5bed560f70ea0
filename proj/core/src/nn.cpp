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

#include "gnas/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gnas/error.hpp"

namespace gnas {
namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}

Matrix sigmoid_matrix(const Matrix& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::kIdentity: return pre;
    case Activation::kRelu: return pre.cwiseMax(0.0);
    case Activation::kTanh: return pre.array().tanh().matrix();
    case Activation::kSigmoid: return sigmoid_matrix(pre);
  }
  return pre;
}

Matrix activate_backward(Activation act, const Matrix& pre, const Matrix& out,
                         const Matrix& grad_out) {
  switch (act) {
    case Activation::kIdentity: return grad_out;
    case Activation::kRelu:
      return (pre.array() > 0.0).select(grad_out, 0.0);
    case Activation::kTanh:
      return (grad_out.array() * (1.0 - out.array().square())).matrix();
    case Activation::kSigmoid:
      return (grad_out.array() * out.array() * (1.0 - out.array())).matrix();
  }
  return grad_out;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_dim, int out_dim, bool bias)
    : weight(out_dim, in_dim), bias(1, bias ? out_dim : 0), has_bias_(bias) {}

void Linear::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, in_dim())));
  fill_uniform(weight.value, bound, rng);
  if (has_bias_) fill_uniform(bias.value, bound, rng);
}

Matrix Linear::forward(const Matrix& x) const {
  require(x.cols() == weight.value.cols(),
          "linear: input has " + std::to_string(x.cols()) + " columns, expected " +
              std::to_string(weight.value.cols()));
  Matrix y = x * weight.value.transpose();
  if (has_bias_) y.rowwise() += bias.value.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& grad_out) {
  require(grad_out.cols() == weight.value.rows() && grad_out.rows() == x.rows(),
          "linear: gradient shape mismatch");
  if (weight.trainable) weight.grad.noalias() += grad_out.transpose() * x;
  if (has_bias_ && bias.trainable) bias.grad += grad_out.colwise().sum();
  return grad_out * weight.value;
}

void Linear::visit(const std::string& prefix, const ParameterVisitor& fn) {
  fn(prefix + ".weight", weight);
  if (has_bias_) fn(prefix + ".bias", bias);
}

void Linear::visit(const std::string& prefix, const ConstParameterVisitor& fn) const {
  fn(prefix + ".weight", weight);
  if (has_bias_) fn(prefix + ".bias", bias);
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::span<const int> dims, Activation hidden) : hidden_activation(hidden) {
  require(dims.size() >= 2, "mlp needs at least input and output dimensions");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(dims[i], dims[i + 1]);
  }
}

void Mlp::init_uniform(Rng& rng) {
  for (auto& l : layers) l.init_uniform(rng);
}

Matrix Mlp::forward(const Matrix& x, MlpCache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (cache) cache->inputs.push_back(h);
    Matrix pre = layers[i].forward(h);
    if (i + 1 == layers.size()) return pre;
    h = activate(hidden_activation, pre);
    if (cache) cache->pre.push_back(std::move(pre));
  }
  return h;
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& grad_out) {
  Matrix g = grad_out;
  for (std::size_t k = layers.size(); k-- > 0;) {
    g = layers[k].backward(cache.inputs[k], g);
    if (k > 0) {
      // cache.inputs[k] is the activation output of hidden layer k - 1.
      g = activate_backward(hidden_activation, cache.pre[k - 1], cache.inputs[k], g);
    }
  }
  return g;
}

void Mlp::visit(const std::string& prefix, const ParameterVisitor& fn) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].visit(prefix + "." + std::to_string(i), fn);
  }
}

void Mlp::visit(const std::string& prefix, const ConstParameterVisitor& fn) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].visit(prefix + "." + std::to_string(i), fn);
  }
}

// ---------------------------------------------------------------------------
// GruCell

GruCell::GruCell(int input_dim, int hidden_dim)
    : w_ih(3 * hidden_dim, input_dim),
      w_hh(3 * hidden_dim, hidden_dim),
      b_ih(1, 3 * hidden_dim),
      b_hh(1, 3 * hidden_dim) {}

void GruCell::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, hidden_dim())));
  fill_uniform(w_ih.value, bound, rng);
  fill_uniform(w_hh.value, bound, rng);
  fill_uniform(b_ih.value, bound, rng);
  fill_uniform(b_hh.value, bound, rng);
}

Matrix GruCell::forward(const Matrix& x, const Matrix& h, GruCache* cache) const {
  const Eigen::Index hd = hidden_dim();
  require(x.cols() == input_dim(), "gru: input has " + std::to_string(x.cols()) +
                                       " columns, expected " +
                                       std::to_string(input_dim()));
  require(h.cols() == hd && h.rows() == x.rows(), "gru: state shape mismatch");

  Matrix gi = x * w_ih.value.transpose();
  gi.rowwise() += b_ih.value.row(0);
  Matrix gh = h * w_hh.value.transpose();
  gh.rowwise() += b_hh.value.row(0);

  Matrix r = sigmoid_matrix(gi.leftCols(hd) + gh.leftCols(hd));
  Matrix z = sigmoid_matrix(gi.middleCols(hd, hd) + gh.middleCols(hd, hd));
  Matrix hn = gh.rightCols(hd);
  Matrix n = (gi.rightCols(hd).array() + r.array() * hn.array()).tanh().matrix();
  Matrix out = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();

  if (cache) {
    cache->x = x;
    cache->h = h;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return out;
}

std::pair<Matrix, Matrix> GruCell::backward(const GruCache& c, const Matrix& grad_out) {
  const Eigen::Index hd = hidden_dim();
  const Eigen::Index b = grad_out.rows();
  const auto& g = grad_out.array();

  Matrix dh = (g * c.z.array()).matrix();
  Eigen::ArrayXXd dz = g * (c.h.array() - c.n.array());
  Eigen::ArrayXXd dn = g * (1.0 - c.z.array());
  Eigen::ArrayXXd dn_pre = dn * (1.0 - c.n.array().square());
  Eigen::ArrayXXd dr = dn_pre * c.hn.array();
  Eigen::ArrayXXd dr_pre = dr * c.r.array() * (1.0 - c.r.array());
  Eigen::ArrayXXd dz_pre = dz * c.z.array() * (1.0 - c.z.array());

  Matrix dgi(b, 3 * hd);
  dgi.leftCols(hd) = dr_pre.matrix();
  dgi.middleCols(hd, hd) = dz_pre.matrix();
  dgi.rightCols(hd) = dn_pre.matrix();
  Matrix dgh = dgi;
  dgh.rightCols(hd) = (dn_pre * c.r.array()).matrix();

  w_ih.grad.noalias() += dgi.transpose() * c.x;
  w_hh.grad.noalias() += dgh.transpose() * c.h;
  b_ih.grad += dgi.colwise().sum();
  b_hh.grad += dgh.colwise().sum();

  Matrix dx = dgi * w_ih.value;
  dh.noalias() += dgh * w_hh.value;
  return {std::move(dx), std::move(dh)};
}

void GruCell::visit(const std::string& prefix, const ParameterVisitor& fn) {
  fn(prefix + ".w_ih", w_ih);
  fn(prefix + ".w_hh", w_hh);
  fn(prefix + ".b_ih", b_ih);
  fn(prefix + ".b_hh", b_hh);
}

void GruCell::visit(const std::string& prefix, const ConstParameterVisitor& fn) const {
  fn(prefix + ".w_ih", w_ih);
  fn(prefix + ".w_hh", w_hh);
  fn(prefix + ".b_ih", b_ih);
  fn(prefix + ".b_hh", b_hh);
}

// ---------------------------------------------------------------------------
// GatedMessage / gated_sum

GatedMessage::GatedMessage(int input_dim, int output_dim)
    : gate(input_dim, output_dim, true), map(input_dim, output_dim, false) {}

void GatedMessage::init_uniform(Rng& rng) {
  gate.init_uniform(rng);
  map.init_uniform(rng);
}

Matrix GatedMessage::forward(const Matrix& c, MessageCache* cache) const {
  Matrix g = sigmoid_matrix(gate.forward(c));
  Matrix m = map.forward(c);
  Matrix out = g.cwiseProduct(m);
  if (cache) {
    cache->input = c;
    cache->gate = std::move(g);
    cache->mapped = std::move(m);
  }
  return out;
}

Matrix GatedMessage::backward(const MessageCache& cache, const Matrix& grad_out) {
  Matrix dm = grad_out.cwiseProduct(cache.gate);
  Matrix dg_pre = (grad_out.array() * cache.mapped.array() * cache.gate.array() *
                   (1.0 - cache.gate.array()))
                      .matrix();
  Matrix dc = gate.backward(cache.input, dg_pre);
  dc += map.backward(cache.input, dm);
  return dc;
}

void GatedMessage::visit(const std::string& prefix, const ParameterVisitor& fn) {
  gate.visit(prefix + ".gate", fn);
  map.visit(prefix + ".map", fn);
}

void GatedMessage::visit(const std::string& prefix, const ConstParameterVisitor& fn) const {
  gate.visit(prefix + ".gate", fn);
  map.visit(prefix + ".map", fn);
}

namespace {

std::vector<std::size_t> canonical_order(std::span<const SourcedMessage> messages) {
  std::vector<std::size_t> order(messages.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return messages[a].source < messages[b].source;
  });
  return order;
}

}  // namespace

Vector gated_sum(const GatedMessage& net, std::span<const SourcedMessage> messages) {
  Vector out = Vector::Zero(net.output_dim());
  for (std::size_t idx : canonical_order(messages)) {
    const auto& msg = messages[idx].value;
    require(msg.size() == net.input_dim(), "gated_sum: message dimension mismatch");
    out += net.forward(msg.transpose()).row(0).transpose();
  }
  return out;
}

std::vector<Vector> gated_sum_backward(GatedMessage& net,
                                       std::span<const SourcedMessage> messages,
                                       const Vector& grad_out) {
  std::vector<Vector> grads(messages.size());
  for (std::size_t idx : canonical_order(messages)) {
    MessageCache cache;
    net.forward(messages[idx].value.transpose(), &cache);
    grads[idx] = net.backward(cache, grad_out.transpose()).row(0).transpose();
  }
  return grads;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable EmbeddingTable::random_normal(int num_types, int dim, Rng& rng) {
  EmbeddingTable t;
  t.weights = Parameter(num_types, dim);
  for (Eigen::Index i = 0; i < num_types; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) t.weights.value(i, j) = standard_normal(rng);
  }
  return t;
}

EmbeddingTable EmbeddingTable::one_hot(int num_types) {
  EmbeddingTable t;
  t.weights = Parameter(num_types, num_types);
  t.weights.value.setIdentity();
  t.weights.trainable = false;
  return t;
}

Vector EmbeddingTable::embed(int type) const {
  if (type < 0 || type >= num_types()) {
    throw IndexOutOfRange("node type " + std::to_string(type) + " outside [0, " +
                          std::to_string(num_types()) + ")");
  }
  return weights.value.row(type).transpose();
}

Matrix EmbeddingTable::lookup(std::span<const int> types) const {
  Matrix out(static_cast<Eigen::Index>(types.size()), dim());
  for (std::size_t i = 0; i < types.size(); ++i) {
    const int t = types[i];
    if (t < 0 || t >= num_types()) {
      throw IndexOutOfRange("node type " + std::to_string(t) + " outside [0, " +
                            std::to_string(num_types()) + ")");
    }
    out.row(static_cast<Eigen::Index>(i)) = weights.value.row(t);
  }
  return out;
}

void EmbeddingTable::backward(std::span<const int> types, const Matrix& grad_out) {
  if (!weights.trainable) return;
  for (std::size_t i = 0; i < types.size(); ++i) {
    weights.grad.row(types[i]) += grad_out.row(static_cast<Eigen::Index>(i));
  }
}

void EmbeddingTable::visit(const std::string& prefix, const ParameterVisitor& fn) {
  fn(prefix + ".weights", weights);
}

void EmbeddingTable::visit(const std::string& prefix, const ConstParameterVisitor& fn) const {
  fn(prefix + ".weights", weights);
}

// ---------------------------------------------------------------------------
// Losses

double softmax_cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& logits,
                             int target, Eigen::RowVectorXd* grad) {
  const double mx = logits.maxCoeff();
  const Eigen::RowVectorXd e = (logits.array() - mx).exp().matrix();
  const double sum = e.sum();
  const double loss = std::log(sum) + mx - logits(target);
  if (grad) {
    *grad = e / sum;
    (*grad)(target) -= 1.0;
  }
  return loss;
}

double bce_with_logits(double logit, double target, double* grad) {
  if (grad) *grad = sigmoid(logit) - target;
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

// ---------------------------------------------------------------------------
// Adam

void Adam::update(std::size_t index, Parameter& p) {
  if (index >= m_.size()) {
    m_.resize(index + 1);
    v_.resize(index + 1);
  }
  if (!p.trainable || p.value.size() == 0) return;
  if (m_[index].size() == 0) {
    m_[index] = Matrix::Zero(p.value.rows(), p.value.cols());
    v_[index] = Matrix::Zero(p.value.rows(), p.value.cols());
  }
  auto& m = m_[index];
  auto& v = v_[index];
  m = options_.beta1 * m + (1.0 - options_.beta1) * p.grad;
  v = options_.beta2 * v + (1.0 - options_.beta2) * p.grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  const double step = options_.learning_rate / bc1;
  p.value.array() -= step * m.array() / ((v.array() / bc2).sqrt() + options_.epsilon);
}

// ---------------------------------------------------------------------------
// Gradient checking

GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<const std::pair<std::string, Parameter*>> params,
                           double epsilon) {
  GradCheckResult result;
  for (const auto& [name, p] : params) {
    for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
      for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
        double& x = p->value(i, j);
        const double saved = x;
        x = saved + 2.0 * epsilon;
        const double f2p = loss();
        x = saved + epsilon;
        const double f1p = loss();
        x = saved - epsilon;
        const double f1m = loss();
        x = saved - 2.0 * epsilon;
        const double f2m = loss();
        x = saved;
        const double numeric = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * epsilon);
        const double analytic = p->grad(i, j);
        // A composite loss carries ~10 ulps of evaluation noise, so the stencil
        // is noisy at 10 * eps_mach * |f| / epsilon; magnitudes below 1e4 times
        // that cannot be resolved to 1e-4.
        const double fmax = std::max({std::abs(f2p), std::abs(f1p), std::abs(f1m), std::abs(f2m)});
        const double floor = std::max(
            1e-8, 1e5 * std::numeric_limits<double>::epsilon() * fmax / epsilon);
        const double rel = std::abs(analytic - numeric) /
                           std::max(floor, std::abs(analytic) + std::abs(numeric));
        ++result.entries_checked;
        if (rel > result.max_relative_error) {
          result.max_relative_error = rel;
          result.worst_parameter = name;
          result.worst_row = i;
          result.worst_col = j;
        }
      }
    }
  }
  return result;
}

}  // namespace gnas
