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

#ifndef GNAS_SEARCH_HPP_
#define GNAS_SEARCH_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/dag_io.hpp"
#include "gnas/gp.hpp"
#include "gnas/model.hpp"
#include "gnas/rng.hpp"

namespace gnas {

// Noiseless stand-in for trained accuracy:
//   lo + (hi - lo) * sigmoid(w1 * zscore(L) - w2 * zscore(C) + mean op score)
// with L the average path length and C the clustering coefficient.
struct OracleConfig {
  double path_weight = 1.0;
  double clustering_weight = 1.2;
  std::vector<double> op_scores;  // indexed like the search space operations
  double lower = 0.70;
  double upper = 0.96;
  double path_mean = 0.0;
  double path_std = 1.0;
  double clustering_mean = 0.0;
  double clustering_std = 1.0;

  void check() const;

  // Default per-operation scores looked up by name (0 for unknown names) and
  // normalization statistics from `calibration_samples` random DAGs.
  static OracleConfig for_space(const SearchSpace& space, int calibration_samples = 10000);
};

double default_op_score(std::string_view operation);

// Throws InvalidDag.
double synthetic_perf(const OracleConfig& oracle, const ArchitectureDag& dag);

// Maximization convention; sigma = sqrt(max(variance, 0)).
double expected_improvement(double mean, double variance, double best_so_far);

struct ProposalConfig {
  int pool_size = 10000;
  int top_known = 10;
  int perturbations_per_known = 10;
  double perturbation_sigma = 0.3;
  // Minimum pairwise distance as a fraction of the mean pool distance.
  double distance_factor = 0.1;
  // Pools larger than this estimate the mean distance from random pairs.
  int exact_distance_limit = 2000;
  int distance_pairs = 20000;
};

struct Proposal {
  std::vector<Vector> latents;
  std::vector<double> ei;
  double distance_floor = 0.0;
};

// Pool = N(0, I) draws plus perturbations of the best known latents; greedy
// by EI under the distance floor. May return fewer than batch_size points if
// the pool runs out.
Proposal propose_batch(const GpSurrogate& surrogate, double best_so_far, int batch_size, Rng& rng,
                       const ProposalConfig& config = {});

using Objective = std::function<double(const ArchitectureDag&)>;

struct BoConfig {
  int iterations = 10;
  int batch_size = 50;
  int top_k = 5;
  // Score recorded for decodes that fail validation.
  double invalid_score = 0.70;
  GpConfig gp;
  ProposalConfig proposal;
};

struct BoIteration {
  int iteration = 0;
  std::size_t evaluations = 0;
  double best_score = 0.0;
  double batch_mean_score = 0.0;
};

struct ScoredArchitecture {
  ArchitectureDag dag;
  double score = 0.0;
};

struct BoResult {
  std::vector<BoIteration> history;          // row 0 is the initial dataset
  std::vector<ScoredArchitecture> top;       // distinct valid DAGs, descending
  std::vector<ScoredArchitecture> evaluated; // initial records, then proposals
  std::size_t invalid_decodes = 0;
};

// Initial records without perf are scored with `objective` and count as
// evaluations. Throws EmptyDataset.
BoResult bo_loop(const VaeModel& model, const Objective& objective,
                 std::span<const DagRecord> init, const BoConfig& config, Rng& rng);

// "iteration,evaluations,best_score,batch_mean_score"
void write_bo_history_csv(std::ostream& out, std::span<const BoIteration> history);

}  // namespace gnas

#endif  // GNAS_SEARCH_HPP_
