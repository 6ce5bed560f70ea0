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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gnas/error.hpp"
#include "gnas/gp.hpp"
#include "support.hpp"

using namespace gnas;
using gnas::testing::random_matrix;

namespace {

// Element-by-element kernel, no vectorized distance trick.
Matrix naive_kernel(const Matrix& a, const Matrix& b, double l, double s2) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = s2 * std::exp(-(a.row(i) - b.row(j)).squaredNorm() / (2.0 * l * l));
    }
  }
  return k;
}

GpConfig fixed(GpHyperparameters h) {
  GpConfig c;
  c.optimize = false;
  c.initial = h;
  return c;
}

Vector smooth_targets(const Matrix& x) {
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = std::sin(x(i, 0)) + 0.5 * x.row(i).sum();
  return y;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("RBF kernel") {
  Rng rng = make_rng(1, "test/gp");
  const Matrix a = random_matrix(5, 3, rng);
  const Matrix b = random_matrix(4, 3, rng);
  const Matrix k = rbf_kernel(a, b, 0.7, 2.0);
  CHECK((k - naive_kernel(a, b, 0.7, 2.0)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(rbf_kernel(a, a, 0.7, 2.0).diagonal().isApproxToConstant(2.0, 1e-15));
  CHECK_THROWS_AS(rbf_kernel(a, random_matrix(2, 2, rng), 1.0, 1.0), ShapeMismatch);
}

TEST_CASE("exact posterior matches a direct linear solve") {
  Rng rng = make_rng(2, "test/gp");
  const Matrix x = random_matrix(30, 2, rng);
  const Vector y = smooth_targets(x);
  const GpHyperparameters h{0.9, 1.5, 0.05};
  const GpSurrogate gp = fit_gp(x, y, fixed(h));
  CHECK_FALSE(gp.sparse());
  CHECK(gp.prior_mean() == doctest::Approx(y.mean()));

  const Matrix q = random_matrix(7, 2, rng);
  Matrix k = naive_kernel(x, x, h.length_scale, h.signal_variance);
  k.diagonal().array() += h.noise_variance;
  const Eigen::FullPivLU<Matrix> lu(k);
  const Matrix ks = naive_kernel(q, x, h.length_scale, h.signal_variance);
  const Vector resid = y.array() - y.mean();
  const Vector want_mean = (ks * lu.solve(resid)).array() + y.mean();
  const Vector want_var =
      (h.signal_variance - (ks * lu.solve(Matrix(ks.transpose()))).diagonal().array()).matrix();
  Vector mean, var;
  gp.predict(q, &mean, &var);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    CHECK(mean(i) == doctest::Approx(want_mean(i)).epsilon(1e-9));
    CHECK(var(i) == doctest::Approx(want_var(i)).epsilon(1e-7));
    const GpPrediction p = gp_predict(gp, q.row(i).transpose());
    CHECK(p.mean == doctest::Approx(mean(i)).epsilon(1e-12));
    CHECK(p.variance == doctest::Approx(var(i)).epsilon(1e-12));
  }
}

TEST_CASE("nearly noiseless GP interpolates its data") {
  Rng rng = make_rng(3, "test/gp");
  const Matrix x = random_matrix(12, 2, rng, 3.0);
  const Vector y = smooth_targets(x);
  const GpSurrogate gp = fit_gp(x, y, fixed({1.0, 1.0, 1e-8}));
  Vector mean, var;
  gp.predict(x, &mean, &var);
  CHECK((mean - y).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(var.maxCoeff() < 1e-4);
  CHECK(var.minCoeff() >= 0.0);
}

TEST_CASE("log marginal likelihood and its gradient") {
  Rng rng = make_rng(4, "test/gp");
  const Matrix x = random_matrix(15, 3, rng);
  const Vector y = smooth_targets(x);
  const GpHyperparameters h{1.3, 0.8, 0.1};
  Matrix k = naive_kernel(x, x, h.length_scale, h.signal_variance);
  k.diagonal().array() += h.noise_variance;
  const Eigen::FullPivLU<Matrix> lu(k);
  const double want = -0.5 * y.dot(lu.solve(y)) - 0.5 * std::log(lu.determinant()) -
                      7.5 * std::log(2.0 * std::numbers::pi);
  Eigen::Vector3d grad;
  CHECK(gp_log_marginal_likelihood(x, y, h, &grad) == doctest::Approx(want).epsilon(1e-10));

  const double e = 1e-5;
  for (int i = 0; i < 3; ++i) {
    auto at = [&](double delta) {
      Eigen::Vector3d logs(std::log(h.length_scale), std::log(h.signal_variance),
                           std::log(h.noise_variance));
      logs(i) += delta;
      return gp_log_marginal_likelihood(
          x, y, {std::exp(logs(0)), std::exp(logs(1)), std::exp(logs(2))});
    };
    const double fd = (at(e) - at(-e)) / (2.0 * e);
    CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("hyperparameter fitting raises the marginal likelihood") {
  Rng rng = make_rng(5, "test/gp");
  const Matrix x = random_matrix(40, 2, rng);
  const Vector y = smooth_targets(x);
  GpConfig c;
  c.initial = {5.0, 0.2, 0.5};
  const GpSurrogate fitted = fit_gp(x, y, c);
  const Vector r = y.array() - y.mean();
  const double before = gp_log_marginal_likelihood(x, r, c.initial);
  const double after = gp_log_marginal_likelihood(x, r, fitted.hyperparameters());
  CHECK(after > before);
  CHECK(fitted.hyperparameters().length_scale > 0.0);
  CHECK(fitted.hyperparameters().noise_variance > 0.0);
}

TEST_CASE("inducing points at the inputs reproduce the exact GP") {
  Rng rng = make_rng(6, "test/gp");
  const Matrix x = random_matrix(25, 2, rng);
  const Vector y = smooth_targets(x);
  const GpHyperparameters h{1.1, 1.0, 0.05};
  GpConfig c = fixed(h);
  const GpSurrogate exact = fit_gp(x, y, c);
  c.force_inducing = true;
  c.num_inducing = 100;
  const GpSurrogate sparse = fit_gp(x, y, c);
  CHECK(sparse.sparse());
  CHECK(sparse.inducing_points() == x);
  const Matrix q = random_matrix(6, 2, rng);
  Vector m1, v1, m2, v2;
  exact.predict(q, &m1, &v1);
  sparse.predict(q, &m2, &v2);
  CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((v1 - v2).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("inducing-point predictions match the DTC formulas") {
  Rng rng = make_rng(7, "test/gp");
  const Matrix x = random_matrix(120, 2, rng);
  const Vector y = smooth_targets(x);
  const GpHyperparameters h{0.8, 1.2, 0.1};
  GpConfig c = fixed(h);
  c.force_inducing = true;
  c.num_inducing = 15;
  const GpSurrogate gp = fit_gp(x, y, c);
  REQUIRE(gp.inducing_points().rows() == 15);
  const Matrix& zi = gp.inducing_points();
  const Matrix q = random_matrix(5, 2, rng);

  const double s2 = h.noise_variance;
  Matrix kmm = naive_kernel(zi, zi, h.length_scale, h.signal_variance);
  kmm.diagonal().array() += gp.jitter();
  const Matrix kmn = naive_kernel(zi, x, h.length_scale, h.signal_variance);
  const Matrix ksm = naive_kernel(q, zi, h.length_scale, h.signal_variance);
  const Matrix sigma = kmm + kmn * kmn.transpose() / s2;
  const Eigen::FullPivLU<Matrix> lu_sigma(sigma);
  const Eigen::FullPivLU<Matrix> lu_kmm(kmm);
  const Vector r = y.array() - y.mean();
  const Vector want_mean = (ksm * lu_sigma.solve(kmn * r) / s2).array() + y.mean();
  const Matrix kms = ksm.transpose();
  const Vector want_var = (h.signal_variance -
                           (ksm * lu_kmm.solve(kms)).diagonal().array() +
                           (ksm * lu_sigma.solve(kms)).diagonal().array())
                              .matrix();
  Vector mean, var;
  gp.predict(q, &mean, &var);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    CHECK(mean(i) == doctest::Approx(want_mean(i)).epsilon(1e-8));
    CHECK(var(i) == doctest::Approx(want_var(i)).epsilon(1e-6));
  }
}

TEST_CASE("large inputs switch to the sparse path") {
  Rng rng = make_rng(8, "test/gp");
  const Matrix x = random_matrix(60, 2, rng);
  GpConfig c = fixed({1.0, 1.0, 0.1});
  c.exact_threshold = 50;
  c.num_inducing = 10;
  const GpSurrogate gp = fit_gp(x, smooth_targets(x), c);
  CHECK(gp.sparse());
  CHECK(gp.inducing_points().rows() == 10);
}

TEST_CASE("k-means separates distant clusters") {
  Rng rng = make_rng(9, "test/gp");
  Matrix pts(90, 2);
  const double centers[3][2] = {{0, 0}, {20, 0}, {0, 20}};
  for (int i = 0; i < 90; ++i) {
    pts(i, 0) = centers[i % 3][0] + 0.1 * standard_normal(rng);
    pts(i, 1) = centers[i % 3][1] + 0.1 * standard_normal(rng);
  }
  const Matrix c = kmeans(pts, 3, 50, 1);
  REQUIRE(c.rows() == 3);
  for (const auto& want : centers) {
    double best = 1e9;
    for (Eigen::Index j = 0; j < 3; ++j) {
      best = std::min(best, std::hypot(c(j, 0) - want[0], c(j, 1) - want[1]));
    }
    CHECK(best < 0.1);
  }
  CHECK(kmeans(pts, 3, 50, 1) == c);
  CHECK_THROWS_AS(kmeans(pts, 0, 10, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(pts, 91, 10, 1), ConfigError);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(fit_gp(Matrix(0, 2), Vector(0)), EmptyDataset);
  CHECK_THROWS_AS(fit_gp(Matrix::Zero(3, 2), Vector::Zero(2)), LengthMismatch);
  Rng rng = make_rng(10, "test/gp");
  const Matrix x = random_matrix(4, 2, rng);
  const GpSurrogate gp = fit_gp(x, smooth_targets(x), fixed({1, 1, 0.1}));
  CHECK_THROWS_AS(gp.predict(Vector::Zero(3)), ShapeMismatch);
}

TEST_CASE("duplicate inputs are rescued by jitter") {
  Matrix x = Matrix::Zero(6, 2);
  Vector y(6);
  y << 1, 1, 1, 2, 2, 2;
  const GpSurrogate gp = fit_gp(x, y, fixed({1.0, 1.0, 0.0}));
  CHECK(gp.jitter() > 0.0);
  CHECK(gp.predict(Vector::Zero(2)).mean == doctest::Approx(1.5).epsilon(1e-3));
}

}  // TEST_SUITE
