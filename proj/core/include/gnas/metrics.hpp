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

#ifndef GNAS_METRICS_HPP_
#define GNAS_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/dag_io.hpp"
#include "gnas/model.hpp"
#include "gnas/nn.hpp"

namespace gnas {

// Mean over DAGs of the fraction of stochastic decodes (samples_z latent draws
// x decodes_per_z decodes each) canonical-form-equal to the source, in
// percent. DAG i draws from its own sub-stream, so the result does not depend
// on `threads`. Throws EmptyDataset.
double reconstruction_accuracy(const VaeModel& model, std::span<const ArchitectureDag> dags,
                               std::uint64_t seed, int samples_z = 10, int decodes_per_z = 10,
                               int threads = 1);

struct PriorReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  double validity = 0.0;              // percent
  std::optional<double> uniqueness;   // percent; unset when nothing is valid
};

// z ~ N(0, I), decodes_per_point stochastic decodes each. Validity includes
// the node count of the model's search space.
PriorReport prior_validity(const VaeModel& model, std::uint64_t seed, int n_points = 1000,
                           int decodes_per_point = 10, int threads = 1);

// |distinct canonical forms| / |dags|, in percent. Throws EmptyDataset.
double uniqueness(std::span<const ArchitectureDag> dags);

// Throw LengthMismatch (and EmptyDataset); pearson_r throws ZeroVariance.
double rmse(std::span<const double> predictions, std::span<const double> targets);
double pearson_r(std::span<const double> x, std::span<const double> y);

// Mean directed shortest-path distance over ordered pairs, unreachable = 0.
double avg_path_length(const ArchitectureDag& dag);
// 3 * triangles / connected triples on the undirected projection; 0 without
// triples.
double clustering_coefficient(const ArchitectureDag& dag);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct PerformanceBin {
  int bin = 0;
  std::size_t count = 0;
  MetricSummary perf;
  MetricSummary path_length;
  MetricSummary clustering;
};

struct CorrelationReport {
  std::vector<double> perf;
  std::vector<double> path_length;
  std::vector<double> clustering;
  std::vector<PerformanceBin> bins;
  // Unset when perf (or the metric) has zero variance.
  std::optional<double> r_path_length;
  std::optional<double> r_clustering;
};

// Equal-count quantile bins over perf (a single bin when perf is constant).
// Throws EmptyDataset; records without perf are rejected with ConfigError.
CorrelationReport correlation_report(std::span<const DagRecord> corpus, int num_bins = 6);

// "bin,count,perf_min,perf_max,perf_mean,path_length_mean,path_length_std,
//  clustering_mean,clustering_std"
void write_bins_csv(std::ostream& out, const CorrelationReport& report);
// "index,perf,path_length,clustering"
void write_points_csv(std::ostream& out, const CorrelationReport& report);

struct Projection {
  Matrix coords;        // n x 2
  Matrix components;    // d x 2, unit columns
  Vector mean;          // d
  Vector eigenvalues;   // all d, descending, covariance normalized by 1/n
};

// Top-2 principal components. Throws EmptyDataset for fewer than 3 rows.
Projection pca_2d(const Matrix& points);

// Encodes posterior means and projects them; "x,y,perf" rows via
// write_projection_csv.
Projection latent_projection_2d(const VaeModel& model, std::span<const DagRecord> corpus);
void write_projection_csv(std::ostream& out, const Projection& projection,
                          std::span<const DagRecord> corpus);

// Formats with %.10g; shared by the CSV writers.
std::string format_number(double value);

}  // namespace gnas

#endif  // GNAS_METRICS_HPP_
