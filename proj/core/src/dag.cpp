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

#include "gnas/dag.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "gnas/error.hpp"

namespace gnas {
namespace {

const std::vector<std::string>& default_operations() {
  static const std::vector<std::string> ops = {
      "conv3x3", "conv5x5", "sepconv3x3", "sepconv5x5", "maxpool3x3",
      "avgpool3x3"};
  return ops;
}

std::vector<bool> reach_forward(const ArchitectureDag& dag) {
  std::vector<bool> seen(static_cast<std::size_t>(dag.num_nodes()), false);
  std::deque<int> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : dag.successors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

std::vector<bool> reach_backward(const ArchitectureDag& dag) {
  const int last = dag.num_nodes() - 1;
  std::vector<bool> seen(static_cast<std::size_t>(dag.num_nodes()), false);
  std::deque<int> queue{last};
  seen[static_cast<std::size_t>(last)] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : dag.predecessors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

// Skip-edge slots (j, i) with 0 <= j < i - 1 over op layers i in [2, L].
std::vector<Edge> skip_slots(int num_op_layers) {
  std::vector<Edge> slots;
  for (int i = 2; i <= num_op_layers; ++i) {
    for (int j = 0; j < i - 1; ++j) slots.push_back({j, i});
  }
  return slots;
}

ArchitectureDag assemble(const SearchSpace& space, const std::vector<int>& layer_ops,
                         const std::vector<Edge>& slots, std::uint64_t mask) {
  const int n = space.num_nodes();
  std::vector<int> ops;
  ops.reserve(static_cast<std::size_t>(n));
  ops.push_back(space.input_type());
  ops.insert(ops.end(), layer_ops.begin(), layer_ops.end());
  ops.push_back(space.output_type());

  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i - 1, i});
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if ((mask >> s) & 1U) edges.push_back(slots[s]);
  }
  return ArchitectureDag::create(std::move(ops),
                                 complete_loose_ends(n, std::move(edges)), space);
}

}  // namespace

SearchSpace::SearchSpace(int num_op_layers, std::vector<std::string> operations)
    : num_op_layers_(num_op_layers), operations_(std::move(operations)) {
  if (num_op_layers_ < 0) {
    throw ConfigError("search space needs a non-negative layer count");
  }
  if (operations_.empty()) {
    throw ConfigError("search space needs at least one operation");
  }
  std::set<std::string> unique(operations_.begin(), operations_.end());
  if (unique.size() != operations_.size()) {
    throw ConfigError("search space operation names must be unique");
  }
}

SearchSpace SearchSpace::enas_default() {
  return SearchSpace(6, default_operations());
}

SearchSpace SearchSpace::enas_subset(int num_op_layers, int num_ops) {
  const auto& all = default_operations();
  if (num_ops < 1 || num_ops > static_cast<int>(all.size())) {
    throw ConfigError("operation subset size must be in [1, " +
                      std::to_string(all.size()) + "]");
  }
  return SearchSpace(num_op_layers,
                     std::vector<std::string>(all.begin(), all.begin() + num_ops));
}

std::optional<int> SearchSpace::operation_index(std::string_view name) const {
  for (std::size_t i = 0; i < operations_.size(); ++i) {
    if (operations_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string SearchSpace::type_name(int type) const {
  if (type == input_type()) return "input";
  if (type == output_type()) return "output";
  if (type < 0 || type > output_type()) return "?";
  return operations_[static_cast<std::size_t>(type)];
}

ArchitectureDag ArchitectureDag::create_unsized(std::vector<int> ops,
                                                std::vector<Edge> edges,
                                                int num_operations) {
  const int n = static_cast<int>(ops.size());
  if (n < 2) throw MalformedDag("a DAG needs at least an input and an output node");
  const int input = num_operations;
  const int output = num_operations + 1;
  if (ops.front() != input) throw MalformedDag("node 0 must be the input type");
  if (ops.back() != output) {
    throw MalformedDag("node " + std::to_string(n - 1) + " must be the output type");
  }
  for (int i = 1; i + 1 < n; ++i) {
    const int t = ops[static_cast<std::size_t>(i)];
    if (t < 0 || t >= num_operations) {
      throw MalformedDag("node " + std::to_string(i) + " has operation index " +
                         std::to_string(t) + " outside [0, " +
                         std::to_string(num_operations) + ")");
    }
  }
  for (const Edge& e : edges) {
    if (e.src >= e.dst) {
      throw MalformedDag("edge (" + std::to_string(e.src) + ", " +
                         std::to_string(e.dst) + ") violates src < dst");
    }
    if (e.src < 0 || e.dst >= n) {
      throw MalformedDag("edge (" + std::to_string(e.src) + ", " +
                         std::to_string(e.dst) + ") references a missing node");
    }
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw MalformedDag("duplicate edge");
  }

  ArchitectureDag dag;
  dag.num_operations_ = num_operations;
  dag.ops_ = std::move(ops);
  dag.edges_ = std::move(edges);
  dag.build_adjacency();
  return dag;
}

ArchitectureDag ArchitectureDag::create(std::vector<int> ops, std::vector<Edge> edges,
                                        const SearchSpace& space) {
  if (static_cast<int>(ops.size()) != space.num_nodes()) {
    throw MalformedDag("expected " + std::to_string(space.num_nodes()) +
                       " nodes, got " + std::to_string(ops.size()));
  }
  return create_unsized(std::move(ops), std::move(edges), space.num_operations());
}

void ArchitectureDag::build_adjacency() {
  const auto n = ops_.size();
  preds_.assign(n, {});
  succs_.assign(n, {});
  // edges_ is sorted by (src, dst), so successor lists come out ascending;
  // predecessor lists are filled in ascending src order as well.
  for (const Edge& e : edges_) {
    succs_[static_cast<std::size_t>(e.src)].push_back(e.dst);
    preds_[static_cast<std::size_t>(e.dst)].push_back(e.src);
  }
}

bool ArchitectureDag::has_edge(int src, int dst) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{src, dst});
}

CanonicalForm canonicalize(const ArchitectureDag& dag) {
  std::string bytes;
  const auto put = [&bytes](int v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<char>((u >> s) & 0xFF));
  };
  put(dag.num_nodes());
  for (int t : dag.ops()) put(t);
  put(static_cast<int>(dag.edges().size()));
  for (const Edge& e : dag.edges()) {
    put(e.src);
    put(e.dst);
  }
  return CanonicalForm(std::move(bytes));
}

bool dags_equal(const ArchitectureDag& a, const ArchitectureDag& b) {
  return canonicalize(a) == canonicalize(b);
}

std::string Violation::describe() const {
  const std::string where = " (node " + std::to_string(node) + ")";
  switch (kind) {
    case ViolationKind::kOrphanNode: return "orphan node" + where;
    case ViolationKind::kDeadEnd: return "dead end" + where;
    case ViolationKind::kUnreachable: return "unreachable from input" + where;
    case ViolationKind::kCannotReachOutput: return "cannot reach output" + where;
    case ViolationKind::kWrongNodeCount: return "wrong node count";
  }
  return "unknown violation";
}

ValidityReport validate(const ArchitectureDag& dag) {
  ValidityReport report;
  const int n = dag.num_nodes();
  const auto forward = reach_forward(dag);
  const auto backward = reach_backward(dag);
  for (int u = 0; u < n; ++u) {
    if (u != 0 && dag.predecessors(u).empty()) {
      report.violations.push_back({ViolationKind::kOrphanNode, u});
    }
    if (u != n - 1 && dag.successors(u).empty()) {
      report.violations.push_back({ViolationKind::kDeadEnd, u});
    }
    if (!forward[static_cast<std::size_t>(u)]) {
      report.violations.push_back({ViolationKind::kUnreachable, u});
    }
    if (!backward[static_cast<std::size_t>(u)]) {
      report.violations.push_back({ViolationKind::kCannotReachOutput, u});
    }
  }
  report.is_valid = report.violations.empty();
  return report;
}

ValidityReport validate(const ArchitectureDag& dag, const SearchSpace& space) {
  ValidityReport report = validate(dag);
  if (dag.num_nodes() != space.num_nodes() ||
      dag.num_operations() != space.num_operations()) {
    report.violations.push_back({ViolationKind::kWrongNodeCount, -1});
    report.is_valid = false;
  }
  return report;
}

std::vector<Edge> complete_loose_ends(int num_nodes, std::vector<Edge> edges) {
  std::vector<bool> has_successor(static_cast<std::size_t>(num_nodes), false);
  for (const Edge& e : edges) has_successor[static_cast<std::size_t>(e.src)] = true;
  const int output = num_nodes - 1;
  for (int u = 0; u < output; ++u) {
    if (!has_successor[static_cast<std::size_t>(u)]) edges.push_back({u, output});
  }
  return edges;
}

ArchitectureDag sample_random(const SearchSpace& space, Rng& rng) {
  const int layers = space.num_op_layers();
  const auto num_ops = static_cast<std::uint64_t>(space.num_operations());
  std::vector<int> layer_ops(static_cast<std::size_t>(layers));
  for (int& t : layer_ops) {
    t = static_cast<int>(std::uniform_int_distribution<std::uint64_t>(0, num_ops - 1)(rng));
  }
  std::vector<Edge> chosen;
  for (const Edge& slot : skip_slots(layers)) {
    if (uniform01(rng) < 0.5) chosen.push_back(slot);
  }
  // Assembled directly rather than via a bit mask, which caps out at 64 slots.
  const int n = space.num_nodes();
  std::vector<int> ops;
  ops.push_back(space.input_type());
  ops.insert(ops.end(), layer_ops.begin(), layer_ops.end());
  ops.push_back(space.output_type());
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i - 1, i});
  edges.insert(edges.end(), chosen.begin(), chosen.end());
  return ArchitectureDag::create(std::move(ops), complete_loose_ends(n, std::move(edges)),
                                 space);
}

std::uint64_t enumeration_count(const SearchSpace& space) {
  const auto layers = static_cast<std::uint64_t>(space.num_op_layers());
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < layers; ++i) {
    count *= static_cast<std::uint64_t>(space.num_operations());
  }
  const std::uint64_t skip_bits = layers == 0 ? 0 : layers * (layers - 1) / 2;
  if (skip_bits >= 63) throw ConfigError("search space too large to enumerate");
  return count << skip_bits;
}

SpaceEnumerator::SpaceEnumerator(const SearchSpace& space)
    : space_(space),
      skip_slots_(skip_slots(space.num_op_layers())),
      op_digits_(static_cast<std::size_t>(space.num_op_layers()), 0) {
  if (skip_slots_.size() >= 63) throw ConfigError("search space too large to enumerate");
}

std::optional<ArchitectureDag> SpaceEnumerator::next() {
  if (done_) return std::nullopt;
  ArchitectureDag dag = assemble(space_, op_digits_, skip_slots_, skip_mask_);

  // Advance: skip mask is the fastest-moving digit, then op digits from the
  // last layer backwards.
  ++skip_mask_;
  if (skip_mask_ == (std::uint64_t{1} << skip_slots_.size())) {
    skip_mask_ = 0;
    int pos = static_cast<int>(op_digits_.size()) - 1;
    while (pos >= 0) {
      auto& digit = op_digits_[static_cast<std::size_t>(pos)];
      if (++digit < space_.num_operations()) break;
      digit = 0;
      --pos;
    }
    if (pos < 0) done_ = true;
  }
  return dag;
}

std::vector<ArchitectureDag> enumerate_space(const SearchSpace& space) {
  std::vector<ArchitectureDag> out;
  out.reserve(static_cast<std::size_t>(enumeration_count(space)));
  SpaceEnumerator it(space);
  while (auto dag = it.next()) out.push_back(std::move(*dag));
  return out;
}

}  // namespace gnas
