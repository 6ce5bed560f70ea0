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

#include "gnas/search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "gnas/decoder.hpp"
#include "gnas/encoder.hpp"
#include "gnas/error.hpp"
#include "gnas/metrics.hpp"

namespace gnas {

void OracleConfig::check() const {
  if (!(path_weight > 0.0) || !(clustering_weight > 0.0)) {
    throw ConfigError("oracle weights must be positive");
  }
  if (!(lower < upper)) throw ConfigError("oracle range lower bound must be below the upper");
  if (!(path_std > 0.0) || !(clustering_std > 0.0)) {
    throw ConfigError("oracle normalization scales must be positive");
  }
}

double default_op_score(std::string_view op) {
  if (op == "conv5x5") return 0.30;
  if (op == "sepconv5x5") return 0.25;
  if (op == "conv3x3") return 0.15;
  if (op == "sepconv3x3") return 0.10;
  if (op == "maxpool3x3") return 0.05;
  return 0.0;
}

OracleConfig OracleConfig::for_space(const SearchSpace& space, int calibration_samples) {
  if (calibration_samples < 2) throw ConfigError("oracle calibration needs at least 2 samples");
  OracleConfig c;
  for (const auto& op : space.operations()) c.op_scores.push_back(default_op_score(op));
  Rng rng = make_rng(0, "oracle/calibration");
  std::vector<double> paths;
  std::vector<double> clus;
  for (int i = 0; i < calibration_samples; ++i) {
    const ArchitectureDag dag = sample_random(space, rng);
    paths.push_back(avg_path_length(dag));
    clus.push_back(clustering_coefficient(dag));
  }
  auto stats = [](const std::vector<double>& v, double* mean, double* sd) {
    const double n = static_cast<double>(v.size());
    *mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - *mean) * (x - *mean);
    *sd = std::sqrt(ss / n);
    if (!(*sd > 0.0)) *sd = 1.0;
  };
  stats(paths, &c.path_mean, &c.path_std);
  stats(clus, &c.clustering_mean, &c.clustering_std);
  return c;
}

double synthetic_perf(const OracleConfig& oracle, const ArchitectureDag& dag) {
  const ValidityReport report = validate(dag);
  if (!report.is_valid) throw InvalidDag("oracle cannot score an invalid DAG");
  const int n = dag.num_nodes();
  double op_score = 0.0;
  int ops = 0;
  for (int i = 1; i < n - 1; ++i) {
    const int op = dag.op(i);
    if (op < 0 || static_cast<std::size_t>(op) >= oracle.op_scores.size()) {
      throw InvalidDag("operation index outside the oracle's score table");
    }
    op_score += oracle.op_scores[static_cast<std::size_t>(op)];
    ++ops;
  }
  if (ops > 0) op_score /= ops;
  const double zl = (avg_path_length(dag) - oracle.path_mean) / oracle.path_std;
  const double zc = (clustering_coefficient(dag) - oracle.clustering_mean) / oracle.clustering_std;
  const double s = oracle.path_weight * zl - oracle.clustering_weight * zc + op_score;
  return oracle.lower + (oracle.upper - oracle.lower) / (1.0 + std::exp(-s));
}

double expected_improvement(double mean, double variance, double best_so_far) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double diff = mean - best_so_far;
  if (!(sigma > 0.0)) return std::max(diff, 0.0);
  const double u = diff / sigma;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(diff * cdf + sigma * pdf, 0.0);
}

Proposal propose_batch(const GpSurrogate& gp, double best_so_far, int batch_size, Rng& rng,
                       const ProposalConfig& cfg) {
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  const Eigen::Index l = gp.inputs().cols();
  const Vector& y = gp.targets();

  std::vector<Eigen::Index> known(static_cast<std::size_t>(y.size()));
  std::iota(known.begin(), known.end(), Eigen::Index{0});
  std::stable_sort(known.begin(), known.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a) > y(b); });
  known.resize(std::min<std::size_t>(known.size(), static_cast<std::size_t>(std::max(0, cfg.top_known))));

  const Eigen::Index pool_n =
      cfg.pool_size + static_cast<Eigen::Index>(known.size()) * cfg.perturbations_per_known;
  Matrix pool(pool_n, l);
  Eigen::Index row = 0;
  for (int i = 0; i < cfg.pool_size; ++i, ++row) {
    for (Eigen::Index j = 0; j < l; ++j) pool(row, j) = standard_normal(rng);
  }
  for (Eigen::Index k : known) {
    for (int p = 0; p < cfg.perturbations_per_known; ++p, ++row) {
      for (Eigen::Index j = 0; j < l; ++j) {
        pool(row, j) = gp.inputs()(k, j) + cfg.perturbation_sigma * standard_normal(rng);
      }
    }
  }
  if (pool_n == 0) return {};

  // Mean pairwise distance, sampled for large pools.
  double mean_dist = 0.0;
  if (pool_n <= cfg.exact_distance_limit) {
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index a = 0; a < pool_n; ++a) {
      for (Eigen::Index b = a + 1; b < pool_n; ++b) {
        sum += (pool.row(a) - pool.row(b)).norm();
        ++count;
      }
    }
    mean_dist = count ? sum / static_cast<double>(count) : 0.0;
  } else {
    std::uniform_int_distribution<Eigen::Index> pick(0, pool_n - 1);
    double sum = 0.0;
    int count = 0;
    while (count < cfg.distance_pairs) {
      const Eigen::Index a = pick(rng);
      const Eigen::Index b = pick(rng);
      if (a == b) continue;
      sum += (pool.row(a) - pool.row(b)).norm();
      ++count;
    }
    mean_dist = sum / count;
  }

  Vector mean;
  Vector var;
  gp.predict(pool, &mean, &var);
  std::vector<double> ei(static_cast<std::size_t>(pool_n));
  for (Eigen::Index i = 0; i < pool_n; ++i) {
    ei[static_cast<std::size_t>(i)] = expected_improvement(mean(i), var(i), best_so_far);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pool_n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ei[static_cast<std::size_t>(a)] > ei[static_cast<std::size_t>(b)];
  });

  Proposal out;
  out.distance_floor = cfg.distance_factor * mean_dist;
  for (Eigen::Index idx : order) {
    if (static_cast<int>(out.latents.size()) == batch_size) break;
    const Vector cand = pool.row(idx).transpose();
    bool far = true;
    for (const Vector& chosen : out.latents) {
      if ((chosen - cand).norm() < out.distance_floor) {
        far = false;
        break;
      }
    }
    if (!far) continue;
    out.latents.push_back(cand);
    out.ei.push_back(ei[static_cast<std::size_t>(idx)]);
  }
  return out;
}

BoResult bo_loop(const VaeModel& model, const Objective& objective,
                 std::span<const DagRecord> init, const BoConfig& config, Rng& rng) {
  if (init.empty()) throw EmptyDataset("BO needs a non-empty initial dataset");
  if (config.iterations < 0) throw ConfigError("iterations must be non-negative");
  const int l = model.config().latent_dim;

  BoResult result;
  std::vector<Vector> latents;
  std::vector<double> scores;
  double best = -std::numeric_limits<double>::infinity();
  double init_sum = 0.0;
  std::size_t evaluations = 0;
  for (const DagRecord& rec : init) {
    double s;
    if (rec.perf) {
      s = *rec.perf;
    } else {
      s = objective(rec.dag);
      ++evaluations;
    }
    latents.push_back(encode(model, rec.dag).mu);
    scores.push_back(s);
    result.evaluated.push_back({rec.dag, s});
    best = std::max(best, s);
    init_sum += s;
  }
  result.history.push_back({0, evaluations, best, init_sum / static_cast<double>(init.size())});

  for (int it = 1; it <= config.iterations; ++it) {
    Matrix x(static_cast<Eigen::Index>(latents.size()), l);
    Vector y(static_cast<Eigen::Index>(scores.size()));
    for (std::size_t i = 0; i < latents.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = latents[i].transpose();
      y(static_cast<Eigen::Index>(i)) = scores[i];
    }
    GpConfig gp_config = config.gp;
    gp_config.seed = derive_seed(config.gp.seed, "bo/gp", static_cast<std::uint64_t>(it));
    const GpSurrogate gp = fit_gp(x, y, gp_config);
    const Proposal proposal = propose_batch(gp, best, config.batch_size, rng, config.proposal);

    double batch_sum = 0.0;
    for (const Vector& z : proposal.latents) {
      ArchitectureDag dag = decode(model, z, DecodeMode::kGreedy, rng);
      double s = config.invalid_score;
      if (validate(dag, model.space()).is_valid) {
        s = objective(dag);
      } else {
        ++result.invalid_decodes;
      }
      ++evaluations;
      latents.push_back(z);
      scores.push_back(s);
      result.evaluated.push_back({std::move(dag), s});
      best = std::max(best, s);
      batch_sum += s;
    }
    const double batch_mean =
        proposal.latents.empty() ? 0.0 : batch_sum / static_cast<double>(proposal.latents.size());
    result.history.push_back({it, evaluations, best, batch_mean});
  }

  std::vector<std::size_t> order(result.evaluated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.evaluated[a].score > result.evaluated[b].score;
  });
  std::unordered_set<CanonicalForm, CanonicalFormHash> seen;
  for (std::size_t i : order) {
    if (static_cast<int>(result.top.size()) >= config.top_k) break;
    const auto& cand = result.evaluated[i];
    if (!validate(cand.dag, model.space()).is_valid) continue;
    if (!seen.insert(canonicalize(cand.dag)).second) continue;
    result.top.push_back(cand);
  }
  return result;
}

void write_bo_history_csv(std::ostream& out, std::span<const BoIteration> history) {
  out << "iteration,evaluations,best_score,batch_mean_score\n";
  for (const auto& h : history) {
    out << h.iteration << ',' << h.evaluations << ',' << format_number(h.best_score) << ','
        << format_number(h.batch_mean_score) << '\n';
  }
}

}  // namespace gnas
