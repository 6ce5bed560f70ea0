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
#include <sstream>

#include "doctest.h"
#include "gnas/error.hpp"
#include "gnas/metrics.hpp"
#include "gnas/search.hpp"
#include "support.hpp"

using namespace gnas;

namespace {

// Trapezoid integral of max(f - best, 0) against the normal density.
double numeric_ei(double mean, double var, double best) {
  const double sd = std::sqrt(var);
  const int steps = 200000;
  const double lo = mean - 12.0 * sd;
  const double hi = mean + 12.0 * sd;
  const double h = (hi - lo) / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double f = lo + i * h;
    const double u = (f - mean) / sd;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    sum += w * std::max(f - best, 0.0) * std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return sum * h;
}

}  // namespace

TEST_SUITE("search") {

TEST_CASE("expected improvement matches numerical integration") {
  for (auto [m, v, b] : {std::tuple{0.8, 0.01, 0.85}, std::tuple{0.9, 0.04, 0.85},
                         std::tuple{0.0, 1.0, 0.0}, std::tuple{-1.0, 0.25, 1.0}}) {
    CHECK(expected_improvement(m, v, b) == doctest::Approx(numeric_ei(m, v, b)).epsilon(1e-7));
  }
  CHECK(expected_improvement(0.9, 0.0, 0.8) == doctest::Approx(0.1));
  CHECK(expected_improvement(0.7, 0.0, 0.8) == 0.0);
  CHECK(expected_improvement(0.7, -1e-9, 0.8) == 0.0);
  CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
}

TEST_CASE("oracle formula and range") {
  const SearchSpace s = SearchSpace::enas_default();
  CHECK(default_op_score("conv5x5") == 0.30);
  CHECK(default_op_score("sepconv5x5") == 0.25);
  CHECK(default_op_score("conv3x3") == 0.15);
  CHECK(default_op_score("sepconv3x3") == 0.10);
  CHECK(default_op_score("maxpool3x3") == 0.05);
  CHECK(default_op_score("avgpool3x3") == 0.0);
  CHECK(default_op_score("unknown") == 0.0);

  const OracleConfig o = OracleConfig::for_space(s, 2000);
  CHECK(o.op_scores.size() == 6);
  CHECK(o.path_std > 0.0);
  CHECK(o.clustering_std > 0.0);
  const OracleConfig again = OracleConfig::for_space(s, 2000);
  CHECK(o.path_mean == again.path_mean);

  Rng rng = make_rng(1, "test/oracle");
  for (int i = 0; i < 200; ++i) {
    const auto d = sample_random(s, rng);
    double ops = 0.0;
    for (int t = 1; t <= 6; ++t) ops += o.op_scores[d.op(t)] / 6.0;
    const double arg = o.path_weight * (avg_path_length(d) - o.path_mean) / o.path_std -
                       o.clustering_weight * (clustering_coefficient(d) - o.clustering_mean) /
                           o.clustering_std +
                       ops;
    const double want = o.lower + (o.upper - o.lower) / (1.0 + std::exp(-arg));
    const double got = synthetic_perf(o, d);
    REQUIRE(got == doctest::Approx(want).epsilon(1e-12));
    REQUIRE(got > 0.70);
    REQUIRE(got < 0.96);
  }

  const auto bad = ArchitectureDag::create(
      {6, 0, 0, 0, 0, 0, 0, 7}, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {2, 7}}, s);
  CHECK_THROWS_AS(synthetic_perf(o, bad), InvalidDag);
  OracleConfig broken = o;
  broken.lower = 0.99;
  CHECK_THROWS_AS(broken.check(), ConfigError);
}

TEST_CASE("batch proposals respect the distance floor") {
  Rng rng = make_rng(2, "test/propose");
  const Matrix x = gnas::testing::random_matrix(30, 4, rng);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = -x.row(i).squaredNorm();
  GpConfig gc;
  gc.optimize = false;
  gc.initial = {1.0, 1.0, 0.01};
  const GpSurrogate gp = fit_gp(x, y, gc);
  ProposalConfig pc;
  pc.pool_size = 3000;
  Rng r1 = make_rng(3, "test/propose");
  const Proposal p = propose_batch(gp, y.maxCoeff(), 20, r1, pc);
  REQUIRE(p.latents.size() == 20);
  REQUIRE(p.ei.size() == 20);
  CHECK(p.distance_floor > 0.0);
  for (std::size_t i = 0; i < p.latents.size(); ++i) {
    CHECK(p.latents[i].size() == 4);
    if (i > 0) CHECK(p.ei[i] <= p.ei[i - 1]);
    for (std::size_t j = 0; j < i; ++j) CHECK((p.latents[i] - p.latents[j]).norm() >= p.distance_floor);
    const GpPrediction pr = gp.predict(p.latents[i]);
    CHECK(p.ei[i] == doctest::Approx(expected_improvement(pr.mean, pr.variance, y.maxCoeff())));
  }
  Rng r2 = make_rng(3, "test/propose");
  const Proposal q = propose_batch(gp, y.maxCoeff(), 20, r2, pc);
  CHECK(q.latents.front() == p.latents.front());

  pc.pool_size = 5;
  pc.top_known = 0;
  Rng r3 = make_rng(3, "test/propose");
  CHECK(propose_batch(gp, y.maxCoeff(), 50, r3, pc).latents.size() <= 5);
  CHECK_THROWS_AS(propose_batch(gp, 0.0, 0, r3, pc), ConfigError);
}

TEST_CASE("BO loop bookkeeping") {
  const SearchSpace s = SearchSpace::enas_subset(3, 3);
  const VaeModel model(s, gnas::testing::small_config(), 4);
  const OracleConfig oracle = OracleConfig::for_space(s, 500);
  const Objective objective = [&](const ArchitectureDag& d) { return synthetic_perf(oracle, d); };
  Rng rng = make_rng(5, "test/bo");
  std::vector<DagRecord> init;
  for (int i = 0; i < 12; ++i) {
    auto d = sample_random(s, rng);
    init.push_back({d, i % 2 ? std::optional<double>(objective(d)) : std::nullopt});
  }
  BoConfig cfg;
  cfg.iterations = 3;
  cfg.batch_size = 4;
  cfg.top_k = 3;
  cfg.gp.optimizer_steps = 10;
  cfg.proposal.pool_size = 500;
  Rng bo_rng = make_rng(6, "test/bo");
  const BoResult r = bo_loop(model, objective, init, cfg, bo_rng);
  REQUIRE(r.history.size() == 4);
  CHECK(r.history[0].iteration == 0);
  CHECK(r.history[0].evaluations == 6);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].best_score >= r.history[i - 1].best_score);
    CHECK(r.history[i].evaluations == 6 + 4 * i);
  }
  CHECK(r.evaluated.size() == 12 + 12);
  std::size_t invalid = 0;
  for (std::size_t i = 12; i < r.evaluated.size(); ++i) {
    if (!validate(r.evaluated[i].dag, s).is_valid) {
      ++invalid;
      CHECK(r.evaluated[i].score == cfg.invalid_score);
    }
  }
  CHECK(invalid == r.invalid_decodes);
  REQUIRE(!r.top.empty());
  CHECK(r.top.size() <= 3);
  for (std::size_t i = 0; i < r.top.size(); ++i) {
    CHECK(validate(r.top[i].dag, s).is_valid);
    if (i > 0) {
      CHECK(r.top[i].score <= r.top[i - 1].score);
      CHECK_FALSE(dags_equal(r.top[i].dag, r.top[i - 1].dag));
    }
  }
  CHECK(r.top.front().score == doctest::Approx(r.history.back().best_score));

  std::ostringstream out;
  write_bo_history_csv(out, r.history);
  CHECK(out.str().rfind("iteration,evaluations,best_score,batch_mean_score\n", 0) == 0);
  Rng e = make_rng(1, "x");
  CHECK_THROWS_AS(bo_loop(model, objective, std::vector<DagRecord>{}, cfg, e), EmptyDataset);
}

}  // TEST_SUITE
