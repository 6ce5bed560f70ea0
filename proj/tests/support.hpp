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

#ifndef GNAS_TESTS_SUPPORT_HPP_
#define GNAS_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gnas/dag.hpp"
#include "gnas/model.hpp"
#include "gnas/nn.hpp"
#include "gnas/rng.hpp"

namespace gnas::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * standard_normal(rng);
  }
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  return random_matrix(n, 1, rng, scale);
}

// Chain input -> op layers -> output, no skips.
inline ArchitectureDag chain(const SearchSpace& space, std::vector<int> layer_ops) {
  std::vector<int> ops;
  ops.push_back(space.input_type());
  for (int op : layer_ops) ops.push_back(op);
  ops.push_back(space.output_type());
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < static_cast<int>(ops.size()); ++i) edges.push_back({i, i + 1});
  return ArchitectureDag::create(std::move(ops), std::move(edges), space);
}

inline ModelConfig small_config(EncoderKind encoder = EncoderKind::kAsync,
                                EmbeddingKind embedding = EmbeddingKind::kLearnable) {
  ModelConfig c;
  c.hidden_dim = 6;
  c.latent_dim = 3;
  c.embed_dim = 3;
  c.gcn_layers = 2;
  c.encoder = encoder;
  c.embedding = embedding;
  return c;
}

// Every trainable parameter, by name.
inline std::vector<std::pair<std::string, Parameter*>> trainable_parameters(VaeModel& model) {
  std::vector<std::pair<std::string, Parameter*>> out;
  model.visit_parameters([&](const std::string& name, Parameter& p) {
    if (p.trainable && p.value.size() > 0) out.emplace_back(name, &p);
  });
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("gnas-test-" + tag + "-" + std::to_string(std::random_device{}()) + "-" +
             std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace gnas::testing

#endif  // GNAS_TESTS_SUPPORT_HPP_
