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

#ifndef GNAS_GP_HPP_
#define GNAS_GP_HPP_

#include <cstdint>

#include "gnas/nn.hpp"

namespace gnas {

struct GpHyperparameters {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-2;
};

struct GpConfig {
  // Inputs beyond this count switch to the inducing-point approximation.
  int exact_threshold = 2000;
  int num_inducing = 500;
  // Use inducing points regardless of n (m = min(num_inducing, n)).
  bool force_inducing = false;

  bool optimize = true;
  int optimizer_steps = 100;
  double optimizer_learning_rate = 0.05;
  // Hyperparameters are fit on a random subset of at most this many points.
  int optimizer_subset = 500;
  // Starting point when optimizing, fixed values otherwise. A non-positive
  // length scale / signal variance means "derive from the data".
  GpHyperparameters initial{0.0, 0.0, -1.0};

  int kmeans_iterations = 50;
  std::uint64_t seed = 0;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // latent f, excludes observation noise
};

// Constant-mean GP with an RBF kernel
//   k(a, b) = s^2 exp(-|a - b|^2 / (2 l^2)).
class GpSurrogate {
 public:
  GpPrediction predict(const Vector& z) const;
  // Row-wise over `points`.
  void predict(const Matrix& points, Vector* mean, Vector* variance) const;

  const GpHyperparameters& hyperparameters() const { return hyper_; }
  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  bool sparse() const { return sparse_; }
  const Matrix& inputs() const { return inputs_; }
  const Vector& targets() const { return targets_; }
  const Matrix& inducing_points() const { return inducing_; }

 private:
  friend GpSurrogate fit_gp(const Matrix&, const Vector&, const GpConfig&);

  Matrix inputs_;
  Vector targets_;
  GpHyperparameters hyper_;
  double prior_mean_ = 0.0;
  double jitter_ = 0.0;
  bool sparse_ = false;

  // Exact: chol_ = chol(K + (noise + jitter) I), alpha_ = K^-1 (y - m).
  // Sparse (DTC): chol_ = chol(Kmm + jitter I), chol_b_ = chol(I + A A^T)
  // with A = chol_^-1 Kmn / noise_sd, and alpha_ = chol_b_^-1 A (y - m) / noise_sd.
  Matrix inducing_;
  Matrix chol_;
  Matrix chol_b_;
  Vector alpha_;
};

// Throws EmptyDataset, LengthMismatch, DegenerateKernel.
GpSurrogate fit_gp(const Matrix& inputs, const Vector& targets, const GpConfig& config = {});

GpPrediction gp_predict(const GpSurrogate& surrogate, const Vector& z);

Matrix rbf_kernel(const Matrix& a, const Matrix& b, double length_scale, double signal_variance);

// Lloyd's algorithm with k-means++ seeding; returns k x d centers.
Matrix kmeans(const Matrix& points, int k, int iterations, std::uint64_t seed);

// Log marginal likelihood of the exact GP; optional gradient w.r.t.
// (log l, log s^2, log noise).
double gp_log_marginal_likelihood(const Matrix& inputs, const Vector& targets,
                                  const GpHyperparameters& hyper, Eigen::Vector3d* grad = nullptr);

}  // namespace gnas

#endif  // GNAS_GP_HPP_
