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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gnas/dag_io.hpp"
#include "gnas/error.hpp"
#include "gnas/metrics.hpp"
#include "support.hpp"

using namespace gnas;

namespace {

// Floyd-Warshall on the directed graph.
double floyd_path_length(const ArchitectureDag& d) {
  const int n = d.num_nodes();
  const int inf = 1 << 20;
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) dist[i][i] = 0;
  for (const Edge& e : d.edges()) dist[e.src][e.dst] = 1;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    }
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && dist[i][j] < inf) total += dist[i][j];
    }
  }
  return total / (n * (n - 1.0));
}

// Brute force over unordered node triples of the undirected projection.
double brute_clustering(const ArchitectureDag& d) {
  const int n = d.num_nodes();
  auto adj = [&](int a, int b) { return d.has_edge(a, b) || d.has_edge(b, a); };
  double closed = 0.0;  // ordered (center, pair) triples that close
  double open = 0.0;
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (a == c || b == c || !adj(c, a) || !adj(c, b)) continue;
        open += 1.0;
        if (adj(a, b)) closed += 1.0;
      }
    }
  }
  return open > 0.0 ? closed / open : 0.0;
}

double two_pass_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("path length and clustering agree with brute-force oracles") {
  const SearchSpace s = SearchSpace::enas_default();
  Rng rng = make_rng(1, "test/metrics");
  for (int i = 0; i < 300; ++i) {
    const auto d = sample_random(s, rng);
    REQUIRE(avg_path_length(d) == doctest::Approx(floyd_path_length(d)).epsilon(1e-12));
    REQUIRE(clustering_coefficient(d) == doctest::Approx(brute_clustering(d)).epsilon(1e-12));
  }
}

TEST_CASE("graph metrics on small hand-worked graphs") {
  const SearchSpace s = SearchSpace::enas_subset(1, 1);
  // Chain of three: distances 1, 2, 1 over 6 ordered pairs; no triangle.
  const auto chain = gnas::testing::chain(s, {0});
  CHECK(avg_path_length(chain) == doctest::Approx(4.0 / 6.0));
  CHECK(clustering_coefficient(chain) == 0.0);
  // Adding the skip closes the only triangle.
  const auto tri = ArchitectureDag::create({1, 0, 2}, {{0, 1}, {1, 2}, {0, 2}}, s);
  CHECK(avg_path_length(tri) == doctest::Approx(3.0 / 6.0));
  CHECK(clustering_coefficient(tri) == doctest::Approx(1.0));
}

TEST_CASE("rmse and pearson") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {1, 2, 3, 4, 7};
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(4.0 / 5.0)));
  CHECK(rmse(a, a) == 0.0);
  const std::vector<double> x = {0.1, 0.4, 0.35, 0.8, 0.9, 0.55};
  const std::vector<double> y = {0.72, 0.80, 0.79, 0.91, 0.95, 0.84};
  CHECK(pearson_r(x, y) == doctest::Approx(two_pass_pearson(x, y)).epsilon(1e-12));
  CHECK(pearson_r(a, a) == doctest::Approx(1.0));
  const std::vector<double> neg = {5, 4, 3, 2, 1};
  CHECK(pearson_r(a, neg) == doctest::Approx(-1.0));
  CHECK(std::abs(pearson_r(a, neg)) <= 1.0);
  const std::vector<double> flat = {2, 2, 2, 2, 2};
  CHECK_THROWS_AS(pearson_r(a, flat), ZeroVariance);
  CHECK_THROWS_AS(rmse(a, std::vector<double>{1, 2}), LengthMismatch);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), EmptyDataset);
}

TEST_CASE("uniqueness") {
  const SearchSpace s = SearchSpace::enas_subset(2, 2);
  const std::vector<ArchitectureDag> dags = {gnas::testing::chain(s, {0, 1}),
                                             gnas::testing::chain(s, {0, 1}),
                                             gnas::testing::chain(s, {1, 1}),
                                             gnas::testing::chain(s, {0, 0})};
  CHECK(uniqueness(dags) == doctest::Approx(75.0));
  CHECK_THROWS_AS(uniqueness(std::vector<ArchitectureDag>{}), EmptyDataset);
}

TEST_CASE("PCA recovers a dominant direction") {
  Rng rng = make_rng(2, "test/pca");
  Matrix pts(400, 3);
  Eigen::Vector3d dir(1.0, -2.0, 2.0);
  dir.normalize();
  for (int i = 0; i < 400; ++i) {
    const double t = 5.0 * standard_normal(rng);
    pts.row(i) = (t * dir + 0.1 * gnas::testing::random_vector(3, rng)).transpose();
    pts.row(i).array() += 3.0;
  }
  const Projection p = pca_2d(pts);
  CHECK(std::abs(p.components.col(0).dot(dir)) > 0.999);
  CHECK(p.components.col(0).norm() == doctest::Approx(1.0));
  CHECK(std::abs(p.components.col(0).dot(p.components.col(1))) < 1e-10);
  // Largest loading of each component is positive.
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg;
    p.components.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(p.components(arg, c) > 0.0);
  }
  const Matrix centered = pts.rowwise() - pts.colwise().mean();
  const Matrix cov = centered.transpose() * centered / 400.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  CHECK(p.eigenvalues(0) == doctest::Approx(es.eigenvalues()(2)).epsilon(1e-10));
  CHECK(p.eigenvalues(2) == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-8));
  CHECK((p.coords - centered * p.components).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(pca_2d(Matrix::Zero(2, 3)), EmptyDataset);
}

TEST_CASE("accuracy and validity do not depend on the thread count") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  const VaeModel model(s, gnas::testing::small_config(), 3);
  Rng rng = make_rng(3, "test/metrics");
  std::vector<ArchitectureDag> dags;
  for (int i = 0; i < 7; ++i) dags.push_back(sample_random(s, rng));
  const double a1 = reconstruction_accuracy(model, dags, 5, 2, 3, 1);
  const double a3 = reconstruction_accuracy(model, dags, 5, 2, 3, 3);
  CHECK(a1 == a3);
  CHECK(a1 >= 0.0);
  CHECK(a1 <= 100.0);
  const PriorReport p1 = prior_validity(model, 5, 20, 3, 1);
  const PriorReport p3 = prior_validity(model, 5, 20, 3, 4);
  CHECK(p1.total == 60);
  CHECK(p1.valid == p3.valid);
  CHECK(p1.validity == doctest::Approx(100.0 * p1.valid / 60.0));
  CHECK(p1.uniqueness == p3.uniqueness);
  CHECK_THROWS_AS(reconstruction_accuracy(model, std::vector<ArchitectureDag>{}, 1), EmptyDataset);
}

TEST_CASE("correlation report bins and CSV output") {
  const SearchSpace s = SearchSpace::enas_default();
  Rng rng = make_rng(4, "test/metrics");
  std::vector<DagRecord> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back({sample_random(s, rng), 0.7 + 0.004 * i});
  const CorrelationReport r = correlation_report(corpus, 6);
  REQUIRE(r.bins.size() == 6);
  std::size_t total = 0;
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    total += r.bins[b].count;
    CHECK(r.bins[b].count == 10);
    if (b > 0) CHECK(r.bins[b].perf.min >= r.bins[b - 1].perf.max);
  }
  CHECK(total == 60);
  REQUIRE(r.r_path_length.has_value());
  CHECK(*r.r_path_length == doctest::Approx(two_pass_pearson(r.perf, r.path_length)).epsilon(1e-12));

  std::ostringstream bins, pts;
  write_bins_csv(bins, r);
  write_points_csv(pts, r);
  CHECK(bins.str().rfind("bin,count,perf_min,perf_max,perf_mean,path_length_mean,path_length_std,"
                         "clustering_mean,clustering_std\n", 0) == 0);
  CHECK(pts.str().rfind("index,perf,path_length,clustering\n", 0) == 0);
  const std::string points = pts.str();
  CHECK(std::count(points.begin(), points.end(), '\n') == 61);

  for (auto& rec : corpus) rec.perf = 0.8;
  const CorrelationReport flat = correlation_report(corpus, 6);
  CHECK(flat.bins.size() == 1);
  CHECK_FALSE(flat.r_path_length.has_value());
  corpus[3].perf.reset();
  CHECK_THROWS_AS(correlation_report(corpus), ConfigError);
  CHECK_THROWS_AS(correlation_report(std::vector<DagRecord>{}), EmptyDataset);
}

TEST_CASE("latent projection CSV") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  const VaeModel model(s, gnas::testing::small_config(), 3);
  Rng rng = make_rng(5, "test/metrics");
  std::vector<DagRecord> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({sample_random(s, rng), 0.75});
  const Projection p = latent_projection_2d(model, corpus);
  CHECK(p.coords.rows() == 10);
  std::ostringstream out;
  write_projection_csv(out, p, corpus);
  CHECK(out.str().rfind("x,y,perf\n", 0) == 0);
  CHECK(format_number(0.1) == "0.1");
}

}  // TEST_SUITE
