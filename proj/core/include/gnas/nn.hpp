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

#ifndef GNAS_NN_HPP_
#define GNAS_NN_HPP_

// Differentiable primitives with hand-written backward passes. Activations are
// batched row-wise: a (B x d) matrix holds B samples of dimension d. Every
// backward() accumulates into the parameter gradients and returns the
// gradient with respect to its inputs.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnas/rng.hpp"

namespace gnas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(Eigen::Index rows, Eigen::Index cols)
      : value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParameterVisitor = std::function<void(const std::string& name, Parameter&)>;
using ConstParameterVisitor =
    std::function<void(const std::string& name, const Parameter&)>;

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

Matrix activate(Activation act, const Matrix& pre);
// Gradient through the activation given its pre-activation input and output.
Matrix activate_backward(Activation act, const Matrix& pre, const Matrix& out,
                         const Matrix& grad_out);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = x W^T + b, with W of shape (out x in).
class Linear {
 public:
  Linear() = default;
  Linear(int in_dim, int out_dim, bool bias = true);

  int in_dim() const { return static_cast<int>(weight.value.cols()); }
  int out_dim() const { return static_cast<int>(weight.value.rows()); }
  bool has_bias() const { return has_bias_; }

  // Uniform in +-1/sqrt(fan_in).
  void init_uniform(Rng& rng);

  Matrix forward(const Matrix& x) const;
  Matrix backward(const Matrix& x, const Matrix& grad_out);

  void visit(const std::string& prefix, const ParameterVisitor& fn);
  void visit(const std::string& prefix, const ConstParameterVisitor& fn) const;

  Parameter weight;
  Parameter bias;

 private:
  bool has_bias_ = true;
};

struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
};

// Affine layers with `hidden` activation between them; the last layer is
// affine only.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::span<const int> dims, Activation hidden = Activation::kRelu);

  void init_uniform(Rng& rng);
  Matrix forward(const Matrix& x, MlpCache* cache = nullptr) const;
  Matrix backward(const MlpCache& cache, const Matrix& grad_out);

  void visit(const std::string& prefix, const ParameterVisitor& fn);
  void visit(const std::string& prefix, const ConstParameterVisitor& fn) const;

  std::vector<Linear> layers;
  Activation hidden_activation = Activation::kRelu;
};

struct GruCache {
  Matrix x, h, r, z, n, hn;  // hn = h W_hn^T + b_hn
};

// Gated recurrent unit, gate order (reset, update, candidate):
//   r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(int input_dim, int hidden_dim);

  int input_dim() const { return static_cast<int>(w_ih.value.cols()); }
  int hidden_dim() const { return static_cast<int>(w_hh.value.cols()); }

  void init_uniform(Rng& rng);
  Matrix forward(const Matrix& x, const Matrix& h, GruCache* cache = nullptr) const;
  // Returns {dx, dh}.
  std::pair<Matrix, Matrix> backward(const GruCache& cache, const Matrix& grad_out);

  void visit(const std::string& prefix, const ParameterVisitor& fn);
  void visit(const std::string& prefix, const ConstParameterVisitor& fn) const;

  Parameter w_ih, w_hh, b_ih, b_hh;  // (3H x I), (3H x H), (1 x 3H), (1 x 3H)
};

struct MessageCache {
  Matrix input, gate, mapped;
};

// Per-message term of the gated sum: sigmoid(g(c)) * m(c), with g affine and
// m linear (no bias).
class GatedMessage {
 public:
  GatedMessage() = default;
  GatedMessage(int input_dim, int output_dim);

  int input_dim() const { return gate.in_dim(); }
  int output_dim() const { return gate.out_dim(); }

  void init_uniform(Rng& rng);
  Matrix forward(const Matrix& c, MessageCache* cache = nullptr) const;
  Matrix backward(const MessageCache& cache, const Matrix& grad_out);

  void visit(const std::string& prefix, const ParameterVisitor& fn);
  void visit(const std::string& prefix, const ConstParameterVisitor& fn) const;

  Linear gate;
  Linear map;
};

struct SourcedMessage {
  int source = 0;
  Vector value;
};

// Sum over messages of sigmoid(g(msg)) * m(msg), accumulated in ascending
// source order so the result does not depend on the order of `messages`.
// The empty set yields the zero vector.
Vector gated_sum(const GatedMessage& net, std::span<const SourcedMessage> messages);
// Backward of gated_sum; returns the gradient w.r.t. each message, in the
// order of `messages`.
std::vector<Vector> gated_sum_backward(GatedMessage& net,
                                       std::span<const SourcedMessage> messages,
                                       const Vector& grad_out);

// Lookup table with one row per node type.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // N(0, 1) entries, trainable.
  static EmbeddingTable random_normal(int num_types, int dim, Rng& rng);
  // Frozen identity rows (dim == num_types).
  static EmbeddingTable one_hot(int num_types);

  int num_types() const { return static_cast<int>(weights.value.rows()); }
  int dim() const { return static_cast<int>(weights.value.cols()); }
  bool trainable() const { return weights.trainable; }

  // Throws IndexOutOfRange.
  Vector embed(int type) const;
  Matrix lookup(std::span<const int> types) const;
  // Scatter-adds rows of grad_out into the table gradient (no-op if frozen).
  void backward(std::span<const int> types, const Matrix& grad_out);

  void visit(const std::string& prefix, const ParameterVisitor& fn);
  void visit(const std::string& prefix, const ConstParameterVisitor& fn) const;

  Parameter weights;
};

// Softmax cross-entropy of one row of logits against `target`; writes
// d loss / d logits into `grad` when non-null.
double softmax_cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& logits,
                             int target, Eigen::RowVectorXd* grad = nullptr);
// Binary cross-entropy with logits.
double bce_with_logits(double logit, double target, double* grad = nullptr);

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over any object exposing visit_parameters(ParameterVisitor). State is
// keyed by visit order, which must stay fixed for the optimizer's lifetime.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  template <typename Model>
  void step(Model& model) {
    ++t_;
    std::size_t index = 0;
    model.visit_parameters([&](const std::string&, Parameter& p) {
      update(index++, p);
    });
  }

  long steps() const { return t_; }

 private:
  void update(std::size_t index, Parameter& p);

  AdamOptions options_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  std::size_t entries_checked = 0;
};

// Compares analytic gradients (already stored in each Parameter::grad) with
// central finite differences of `loss` over every entry of every listed
// parameter. Uses the fourth-order central stencil
//   f'(x) ~ (-f(x+2e) + 8 f(x+e) - 8 f(x-e) + f(x-2e)) / (12 e).
// Relative error per entry: |a - n| / max(floor, |a| + |n|), where floor is
// the larger of 1e-8 and 1e5 * eps_mach * max|f| / epsilon (the magnitude at
// which roundoff of a ~10-ulp-noisy loss reaches 1e-4 relative error).
GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<const std::pair<std::string, Parameter*>> params,
                           double epsilon = 1e-5);

}  // namespace gnas

#endif  // GNAS_NN_HPP_
