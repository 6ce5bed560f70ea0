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

#include "gnas/gp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <vector>

#include "gnas/error.hpp"
#include "gnas/rng.hpp"

namespace gnas {
namespace {

constexpr double kJitters[] = {0.0, 1e-12, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix d = (-2.0 * a * b.transpose()).eval();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  return d.cwiseMax(0.0);
}

// Cholesky of `k` with escalating diagonal jitter. A factor whose smallest
// pivot is negligible next to the diagonal counts as a failure too; Eigen's
// LLT only reports non-positive pivots.
bool robust_cholesky(const Matrix& k, Matrix* l, double* jitter_used) {
  const double scale = std::max(1.0, k.diagonal().cwiseAbs().maxCoeff());
  for (double jitter : kJitters) {
    Matrix kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(kj);
    if (llt.info() != Eigen::Success) continue;
    Matrix factor = llt.matrixL();
    const double min_pivot = factor.diagonal().minCoeff();
    if (!(min_pivot * min_pivot > 1e-13 * scale)) continue;
    *l = std::move(factor);
    *jitter_used = jitter;
    return true;
  }
  return false;
}

void warn_negative_variance(double v) {
  static std::once_flag once;
  std::call_once(once, [v] {
    std::cerr << "gnas: warning: GP predictive variance " << v << " clamped to 0\n";
  });
}

double median_pairwise_distance(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) return 1.0;
  const Matrix d2 = squared_distances(x, x);
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(std::sqrt(d2(i, j)));
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double variance_of(const Vector& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size());
}

GpHyperparameters fit_hyperparameters(const Matrix& x, const Vector& y, const GpConfig& cfg) {
  GpHyperparameters start = cfg.initial;
  const double var = variance_of(y);
  const double data_scale = var > 0.0 ? var : 1.0;
  if (!(start.length_scale > 0.0)) start.length_scale = median_pairwise_distance(x);
  if (!(start.signal_variance > 0.0)) start.signal_variance = data_scale;
  if (start.noise_variance < 0.0) start.noise_variance = 0.1 * data_scale;
  if (!cfg.optimize || cfg.optimizer_steps <= 0) return start;

  // Ascent on a subset, in log space.
  Matrix xs = x;
  Vector ys = y;
  if (x.rows() > cfg.optimizer_subset) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng = make_rng(cfg.seed, "gp/subset");
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(cfg.optimizer_subset));
    std::sort(idx.begin(), idx.end());
    xs.resize(cfg.optimizer_subset, x.cols());
    ys.resize(cfg.optimizer_subset);
    for (int i = 0; i < cfg.optimizer_subset; ++i) {
      xs.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
      ys(i) = y(idx[static_cast<std::size_t>(i)]);
    }
  }
  ys.array() -= y.mean();

  Eigen::Vector3d theta(std::log(start.length_scale), std::log(start.signal_variance),
                        std::log(std::max(start.noise_variance, 1e-10 * data_scale)));
  const Eigen::Vector3d lo(theta(0) - std::log(1e3), std::log(1e-6 * data_scale),
                           std::log(1e-8 * data_scale));
  const Eigen::Vector3d hi(theta(0) + std::log(1e3), std::log(1e3 * data_scale),
                           std::log(10.0 * data_scale));
  auto unpack = [](const Eigen::Vector3d& t) {
    return GpHyperparameters{std::exp(t(0)), std::exp(t(1)), std::exp(t(2))};
  };

  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  const double b1 = 0.9;
  const double b2 = 0.999;
  GpHyperparameters best = unpack(theta);
  double best_lml = -std::numeric_limits<double>::infinity();
  for (int step = 1; step <= cfg.optimizer_steps; ++step) {
    Eigen::Vector3d g;
    double lml;
    try {
      lml = gp_log_marginal_likelihood(xs, ys, unpack(theta), &g);
    } catch (const DegenerateKernel&) {
      break;
    }
    if (lml > best_lml) {
      best_lml = lml;
      best = unpack(theta);
    }
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const Eigen::Vector3d mh = m / (1.0 - std::pow(b1, step));
    const Eigen::Vector3d vh = v / (1.0 - std::pow(b2, step));
    theta += cfg.optimizer_learning_rate * mh.cwiseQuotient((vh.cwiseSqrt().array() + 1e-8).matrix());
    theta = theta.cwiseMax(lo).cwiseMin(hi);
  }
  return best;
}

}  // namespace

Matrix rbf_kernel(const Matrix& a, const Matrix& b, double length_scale, double signal_variance) {
  if (a.cols() != b.cols()) throw ShapeMismatch("kernel inputs differ in dimension");
  const double inv = -0.5 / (length_scale * length_scale);
  return signal_variance * (squared_distances(a, b) * inv).array().exp().matrix();
}

double gp_log_marginal_likelihood(const Matrix& x, const Vector& y, const GpHyperparameters& h,
                                  Eigen::Vector3d* grad) {
  const Eigen::Index n = x.rows();
  const Matrix d2 = squared_distances(x, x);
  const Matrix kf = h.signal_variance * (d2 * (-0.5 / (h.length_scale * h.length_scale)))
                                            .array()
                                            .exp()
                                            .matrix();
  Matrix k = kf;
  k.diagonal().array() += h.noise_variance;
  Matrix l;
  double jitter = 0.0;
  if (!robust_cholesky(k, &l, &jitter)) throw DegenerateKernel("kernel matrix is not positive definite");
  const auto tri = l.triangularView<Eigen::Lower>();
  Vector alpha = tri.solve(y);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);
  const double lml = -0.5 * y.dot(alpha) - l.diagonal().array().log().sum() -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (grad) {
    Matrix kinv = Matrix::Identity(n, n);
    tri.solveInPlace(kinv);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
    const Matrix w = alpha * alpha.transpose() - kinv;
    const double inv_l2 = 1.0 / (h.length_scale * h.length_scale);
    (*grad)(0) = 0.5 * (w.array() * kf.array() * d2.array()).sum() * inv_l2;
    (*grad)(1) = 0.5 * (w.array() * kf.array()).sum();
    (*grad)(2) = 0.5 * (h.noise_variance + jitter) * w.trace();
  }
  return lml;
}

Matrix kmeans(const Matrix& points, int k, int iterations, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ConfigError("k-means needs 1 <= k <= number of points");
  Rng rng = make_rng(seed, "gp/kmeans");
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));
  Vector nearest = squared_distances(points, centers.topRows(1)).col(0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= nearest(i);
        if (u < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = points.row(chosen);
    nearest = nearest.cwiseMin(squared_distances(points, centers.row(c)).col(0));
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    const Matrix d = squared_distances(points, centers);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      d.row(i).minCoeff(&best);
      if (assign[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
  }
  return centers;
}

GpSurrogate fit_gp(const Matrix& inputs, const Vector& targets, const GpConfig& config) {
  if (inputs.rows() == 0) throw EmptyDataset("GP needs at least one training point");
  if (inputs.rows() != targets.size()) throw LengthMismatch("GP inputs and targets differ in length");

  GpSurrogate gp;
  gp.inputs_ = inputs;
  gp.targets_ = targets;
  gp.prior_mean_ = targets.mean();
  gp.hyper_ = fit_hyperparameters(inputs, targets, config);
  const Vector r = targets.array() - gp.prior_mean_;
  const GpHyperparameters& h = gp.hyper_;

  gp.sparse_ = config.force_inducing || inputs.rows() > config.exact_threshold;
  if (!gp.sparse_) {
    Matrix k = rbf_kernel(inputs, inputs, h.length_scale, h.signal_variance);
    k.diagonal().array() += h.noise_variance;
    if (!robust_cholesky(k, &gp.chol_, &gp.jitter_)) {
      throw DegenerateKernel("kernel matrix is not positive definite even with jitter 1e-6");
    }
    const auto tri = gp.chol_.triangularView<Eigen::Lower>();
    gp.alpha_ = tri.solve(r);
    gp.chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(gp.alpha_);
    return gp;
  }

  const int m = static_cast<int>(std::min<Eigen::Index>(config.num_inducing, inputs.rows()));
  gp.inducing_ = m == inputs.rows() ? inputs : kmeans(inputs, m, config.kmeans_iterations, config.seed);
  const Matrix kmm = rbf_kernel(gp.inducing_, gp.inducing_, h.length_scale, h.signal_variance);
  if (!robust_cholesky(kmm, &gp.chol_, &gp.jitter_)) {
    throw DegenerateKernel("inducing kernel matrix is not positive definite even with jitter 1e-6");
  }
  const double sd = std::sqrt(std::max(h.noise_variance, 1e-12));
  Matrix a = rbf_kernel(gp.inducing_, inputs, h.length_scale, h.signal_variance);
  gp.chol_.triangularView<Eigen::Lower>().solveInPlace(a);
  a /= sd;
  Matrix b = a * a.transpose();
  b.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) throw DegenerateKernel("inducing system is not positive definite");
  gp.chol_b_ = llt.matrixL();
  gp.alpha_ = gp.chol_b_.triangularView<Eigen::Lower>().solve(a * r) / sd;
  return gp;
}

void GpSurrogate::predict(const Matrix& points, Vector* mean, Vector* variance) const {
  if (points.cols() != inputs_.cols()) throw ShapeMismatch("query dimension differs from GP inputs");
  const GpHyperparameters& h = hyper_;
  Matrix cross;
  Vector m;
  Vector v;
  if (!sparse_) {
    cross = rbf_kernel(inputs_, points, h.length_scale, h.signal_variance);
    m = (cross.transpose() * alpha_).array() + prior_mean_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
    v = (h.signal_variance - cross.colwise().squaredNorm().array()).matrix().transpose();
  } else {
    cross = rbf_kernel(inducing_, points, h.length_scale, h.signal_variance);
    chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
    Matrix t2 = chol_b_.triangularView<Eigen::Lower>().solve(cross);
    m = (t2.transpose() * alpha_).array() + prior_mean_;
    v = (h.signal_variance - cross.colwise().squaredNorm().array() +
         t2.colwise().squaredNorm().array())
            .matrix()
            .transpose();
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0.0) {
      if (v(i) < -1e-8) warn_negative_variance(v(i));
      v(i) = 0.0;
    }
  }
  if (mean) *mean = std::move(m);
  if (variance) *variance = std::move(v);
}

GpPrediction GpSurrogate::predict(const Vector& z) const {
  Vector m;
  Vector v;
  predict(Matrix(z.transpose()), &m, &v);
  return GpPrediction{m(0), v(0)};
}

GpPrediction gp_predict(const GpSurrogate& surrogate, const Vector& z) {
  return surrogate.predict(z);
}

}  // namespace gnas
