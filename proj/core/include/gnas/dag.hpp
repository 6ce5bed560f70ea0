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

#ifndef GNAS_DAG_HPP_
#define GNAS_DAG_HPP_

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnas/rng.hpp"

namespace gnas {

// A macro search space: a fixed number of operation layers between one input
// and one output node. Node types are indexed as [0, |ops|) for operations,
// then |ops| for the input node and |ops| + 1 for the output node.
class SearchSpace {
 public:
  SearchSpace(int num_op_layers, std::vector<std::string> operations);

  // Six layers, six operations.
  static SearchSpace enas_default();
  // The first `num_ops` default operations over `num_op_layers` layers.
  static SearchSpace enas_subset(int num_op_layers, int num_ops);

  int num_op_layers() const { return num_op_layers_; }
  int num_operations() const { return static_cast<int>(operations_.size()); }
  int num_node_types() const { return num_operations() + 2; }
  int num_nodes() const { return num_op_layers_ + 2; }
  int input_type() const { return num_operations(); }
  int output_type() const { return num_operations() + 1; }
  const std::vector<std::string>& operations() const { return operations_; }

  std::optional<int> operation_index(std::string_view name) const;
  std::string type_name(int type) const;

  bool operator==(const SearchSpace&) const = default;

 private:
  int num_op_layers_;
  std::vector<std::string> operations_;
};

struct Edge {
  int src = 0;
  int dst = 0;
  auto operator<=>(const Edge&) const = default;
};

// Ordered labeled DAG. Node index is the topological order; every edge has
// src < dst. Immutable after construction.
class ArchitectureDag {
 public:
  // Structural checks against a search space, including the node count.
  // Throws MalformedDag.
  static ArchitectureDag create(std::vector<int> ops, std::vector<Edge> edges,
                                const SearchSpace& space);

  // Structural checks only (ordering, endpoint types, op range); the node
  // count may differ from the space. Generated graphs use this.
  static ArchitectureDag create_unsized(std::vector<int> ops,
                                        std::vector<Edge> edges,
                                        int num_operations);

  int num_nodes() const { return static_cast<int>(ops_.size()); }
  int num_operations() const { return num_operations_; }
  int input_type() const { return num_operations_; }
  int output_type() const { return num_operations_ + 1; }

  std::span<const int> ops() const { return ops_; }
  int op(int node) const { return ops_[static_cast<std::size_t>(node)]; }
  // Sorted lexicographically by (src, dst).
  const std::vector<Edge>& edges() const { return edges_; }
  // Ascending source index.
  std::span<const int> predecessors(int node) const {
    return preds_[static_cast<std::size_t>(node)];
  }
  std::span<const int> successors(int node) const {
    return succs_[static_cast<std::size_t>(node)];
  }
  bool has_edge(int src, int dst) const;

 private:
  ArchitectureDag() = default;
  void build_adjacency();

  int num_operations_ = 0;
  std::vector<int> ops_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
};

// Byte string uniquely determined by the node types and the sorted edge set.
class CanonicalForm {
 public:
  explicit CanonicalForm(std::string bytes) : bytes_(std::move(bytes)) {}
  const std::string& bytes() const { return bytes_; }
  auto operator<=>(const CanonicalForm&) const = default;

 private:
  std::string bytes_;
};

struct CanonicalFormHash {
  std::size_t operator()(const CanonicalForm& f) const {
    return std::hash<std::string>{}(f.bytes());
  }
};

CanonicalForm canonicalize(const ArchitectureDag& dag);
bool dags_equal(const ArchitectureDag& a, const ArchitectureDag& b);

enum class ViolationKind {
  kOrphanNode,          // non-input node without a predecessor
  kDeadEnd,             // non-output node without a successor
  kUnreachable,         // not reachable from the input node
  kCannotReachOutput,   // output not reachable from the node
  kWrongNodeCount,      // node count differs from the search space
};

struct Violation {
  ViolationKind kind;
  int node = -1;
  std::string describe() const;
};

struct ValidityReport {
  bool is_valid = true;
  std::vector<Violation> violations;
};

ValidityReport validate(const ArchitectureDag& dag);
// Additionally requires the node count of `space`.
ValidityReport validate(const ArchitectureDag& dag, const SearchSpace& space);

// ENAS-style macro sampling: uniform op per layer, mandatory edge i-1 -> i,
// Bernoulli(0.5) skip edges (j, i) for j < i - 1 over op layers, and loose
// ends absorbed by the output node. Always valid.
ArchitectureDag sample_random(const SearchSpace& space, Rng& rng);

// Number of DAGs produced by enumerate_space:
//   |ops|^L * 2^(L(L-1)/2)
std::uint64_t enumeration_count(const SearchSpace& space);

// Enumerates every DAG the sampling rule can produce, exactly once.
// Single-consumer; the caller is responsible for keeping the space small.
class SpaceEnumerator {
 public:
  explicit SpaceEnumerator(const SearchSpace& space);
  std::optional<ArchitectureDag> next();

 private:
  SearchSpace space_;
  std::vector<Edge> skip_slots_;
  std::vector<int> op_digits_;
  std::uint64_t skip_mask_ = 0;
  bool done_ = false;
};

std::vector<ArchitectureDag> enumerate_space(const SearchSpace& space);

// Connects every node (other than the output) without a successor to the
// output node. Returns the completed edge list.
std::vector<Edge> complete_loose_ends(int num_nodes, std::vector<Edge> edges);

}  // namespace gnas

#endif  // GNAS_DAG_HPP_
