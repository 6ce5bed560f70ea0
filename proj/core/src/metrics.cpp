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

#include "gnas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "gnas/decoder.hpp"
#include "gnas/encoder.hpp"
#include "gnas/error.hpp"
#include "gnas/rng.hpp"
#include "parallel.hpp"

namespace gnas {
namespace {

MetricSummary summarize(std::span<const double> v) {
  MetricSummary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

bool has_variance(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end();
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

double reconstruction_accuracy(const VaeModel& model, std::span<const ArchitectureDag> dags,
                               std::uint64_t seed, int samples_z, int decodes_per_z,
                               int threads) {
  if (dags.empty()) throw EmptyDataset("reconstruction accuracy needs a non-empty test set");
  if (samples_z < 1 || decodes_per_z < 1) throw ConfigError("sample counts must be positive");
  std::vector<double> fraction(dags.size(), 0.0);
  detail::parallel_for(dags.size(), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, "eval/recon", i);
    const Posterior post = encode(model, dags[i]);
    int hits = 0;
    for (int s = 0; s < samples_z; ++s) {
      const Vector z = reparameterize(post.mu, post.log_var, rng);
      for (int d = 0; d < decodes_per_z; ++d) {
        if (dags_equal(decode(model, z, DecodeMode::kStochastic, rng), dags[i])) ++hits;
      }
    }
    fraction[i] = static_cast<double>(hits) / (samples_z * decodes_per_z);
  });
  return 100.0 * std::accumulate(fraction.begin(), fraction.end(), 0.0) /
         static_cast<double>(dags.size());
}

PriorReport prior_validity(const VaeModel& model, std::uint64_t seed, int n_points,
                           int decodes_per_point, int threads) {
  if (n_points < 0 || decodes_per_point < 1) throw ConfigError("sample counts must be positive");
  const int l = model.config().latent_dim;
  std::vector<std::vector<ArchitectureDag>> decoded(static_cast<std::size_t>(n_points));
  detail::parallel_for(decoded.size(), threads, [&](std::size_t p) {
    Rng rng = make_rng(seed, "eval/prior", p);
    Vector z(l);
    for (int j = 0; j < l; ++j) z(j) = standard_normal(rng);
    auto& out = decoded[p];
    out.reserve(static_cast<std::size_t>(decodes_per_point));
    for (int d = 0; d < decodes_per_point; ++d) {
      out.push_back(decode(model, z, DecodeMode::kStochastic, rng));
    }
  });

  PriorReport report;
  std::vector<ArchitectureDag> valid;
  for (const auto& point : decoded) {
    for (const auto& dag : point) {
      ++report.total;
      if (validate(dag, model.space()).is_valid) valid.push_back(dag);
    }
  }
  report.valid = valid.size();
  report.validity = report.total ? 100.0 * static_cast<double>(report.valid) /
                                       static_cast<double>(report.total)
                                 : 0.0;
  if (!valid.empty()) report.uniqueness = uniqueness(valid);
  return report;
}

double uniqueness(std::span<const ArchitectureDag> dags) {
  if (dags.empty()) throw EmptyDataset("uniqueness of an empty set is undefined");
  std::unordered_set<CanonicalForm, CanonicalFormHash> seen;
  for (const auto& d : dags) seen.insert(canonicalize(d));
  return 100.0 * static_cast<double>(seen.size()) / static_cast<double>(dags.size());
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw LengthMismatch("rmse inputs differ in length");
  if (predictions.empty()) throw EmptyDataset("rmse of empty inputs");
  double ss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = predictions[i] - targets[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(targets.size()));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("pearson inputs differ in length");
  if (x.size() < 2) throw ZeroVariance("pearson needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw ZeroVariance("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double avg_path_length(const ArchitectureDag& dag) {
  const int n = dag.num_nodes();
  if (n < 2) return 0.0;
  long total = 0;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> queue;
  queue.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (int v : dag.successors(u)) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          total += dist[static_cast<std::size_t>(v)];
          queue.push_back(v);
        }
      }
    }
  }
  return static_cast<double>(total) / (static_cast<double>(n) * (n - 1));
}

double clustering_coefficient(const ArchitectureDag& dag) {
  const int n = dag.num_nodes();
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                     std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<long> degree(static_cast<std::size_t>(n), 0);
  for (const Edge& e : dag.edges()) {
    adj[static_cast<std::size_t>(e.src)][static_cast<std::size_t>(e.dst)] = 1;
    adj[static_cast<std::size_t>(e.dst)][static_cast<std::size_t>(e.src)] = 1;
    ++degree[static_cast<std::size_t>(e.src)];
    ++degree[static_cast<std::size_t>(e.dst)];
  }
  long triples = 0;
  for (long d : degree) triples += d * (d - 1) / 2;
  if (triples == 0) return 0.0;
  long triangles = 0;
  for (const Edge& e : dag.edges()) {
    // Each triangle is counted once, at its lowest-indexed edge (a, b) with
    // the third vertex above b.
    for (int c = e.dst + 1; c < n; ++c) {
      if (adj[static_cast<std::size_t>(e.src)][static_cast<std::size_t>(c)] &&
          adj[static_cast<std::size_t>(e.dst)][static_cast<std::size_t>(c)]) {
        ++triangles;
      }
    }
  }
  return 3.0 * static_cast<double>(triangles) / static_cast<double>(triples);
}

CorrelationReport correlation_report(std::span<const DagRecord> corpus, int num_bins) {
  if (corpus.empty()) throw EmptyDataset("correlation report needs a non-empty corpus");
  if (num_bins < 1) throw ConfigError("num_bins must be positive");
  CorrelationReport r;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].perf) {
      throw ConfigError("record " + std::to_string(i + 1) + " has no perf label");
    }
    r.perf.push_back(*corpus[i].perf);
    r.path_length.push_back(avg_path_length(corpus[i].dag));
    r.clustering.push_back(clustering_coefficient(corpus[i].dag));
  }
  const bool varied = has_variance(r.perf);
  if (varied && has_variance(r.path_length)) r.r_path_length = pearson_r(r.perf, r.path_length);
  if (varied && has_variance(r.clustering)) r.r_clustering = pearson_r(r.perf, r.clustering);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.perf[a] < r.perf[b]; });
  const std::size_t n = order.size();
  const std::size_t bins = varied ? std::min<std::size_t>(static_cast<std::size_t>(num_bins), n) : 1;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t begin = n * b / bins;
    const std::size_t end = n * (b + 1) / bins;
    std::vector<double> p;
    std::vector<double> l;
    std::vector<double> c;
    for (std::size_t k = begin; k < end; ++k) {
      p.push_back(r.perf[order[k]]);
      l.push_back(r.path_length[order[k]]);
      c.push_back(r.clustering[order[k]]);
    }
    r.bins.push_back(PerformanceBin{static_cast<int>(b), end - begin, summarize(p), summarize(l),
                                    summarize(c)});
  }
  return r;
}

void write_bins_csv(std::ostream& out, const CorrelationReport& report) {
  out << "bin,count,perf_min,perf_max,perf_mean,path_length_mean,path_length_std,"
         "clustering_mean,clustering_std\n";
  for (const auto& b : report.bins) {
    out << b.bin << ',' << b.count << ',' << format_number(b.perf.min) << ','
        << format_number(b.perf.max) << ',' << format_number(b.perf.mean) << ','
        << format_number(b.path_length.mean) << ',' << format_number(b.path_length.stddev) << ','
        << format_number(b.clustering.mean) << ',' << format_number(b.clustering.stddev) << '\n';
  }
}

void write_points_csv(std::ostream& out, const CorrelationReport& report) {
  out << "index,perf,path_length,clustering\n";
  for (std::size_t i = 0; i < report.perf.size(); ++i) {
    out << i << ',' << format_number(report.perf[i]) << ','
        << format_number(report.path_length[i]) << ',' << format_number(report.clustering[i])
        << '\n';
  }
}

Projection pca_2d(const Matrix& points) {
  if (points.rows() < 3) throw EmptyDataset("projection needs at least 3 points");
  if (points.cols() < 1) throw ShapeMismatch("projection needs at least one dimension");
  Projection p;
  p.mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - p.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(points.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Eigen::Index d = cov.rows();
  p.eigenvalues = eig.eigenvalues().reverse();
  p.components = Matrix::Zero(d, 2);
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, d); ++c) {
    Vector v = eig.eigenvectors().col(d - 1 - c);
    // Fix the sign so the largest-magnitude loading is positive.
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    p.components.col(c) = v;
  }
  p.coords = centered * p.components;
  return p;
}

Projection latent_projection_2d(const VaeModel& model, std::span<const DagRecord> corpus) {
  const std::vector<ArchitectureDag> dags = dags_of(corpus);
  return pca_2d(encode_means(model, dags));
}

void write_projection_csv(std::ostream& out, const Projection& projection,
                          std::span<const DagRecord> corpus) {
  if (static_cast<std::size_t>(projection.coords.rows()) != corpus.size()) {
    throw LengthMismatch("projection and corpus differ in length");
  }
  out << "x,y,perf\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << format_number(projection.coords(r, 0)) << ',' << format_number(projection.coords(r, 1))
        << ',' << (corpus[i].perf ? format_number(*corpus[i].perf) : std::string()) << '\n';
  }
}

}  // namespace gnas
