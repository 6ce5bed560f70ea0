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

#include "gnas/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gnas/error.hpp"
#include "json.hpp"

namespace gnas {

using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "gnas-checkpoint";

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "relu";
}

Activation parse_activation(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw CheckpointError("unknown activation '" + s + "'");
}

template <typename T>
T field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw CheckpointError(std::string("checkpoint is missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const ordered_json::exception& e) {
    throw CheckpointError(std::string("checkpoint field '") + key + "': " + e.what());
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const VaeModel& model, const Metadata& metadata) {
  const auto& cfg = model.config();
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["space"] = {{"num_op_layers", model.space().num_op_layers()},
                {"operations", model.space().operations()}};
  j["model"] = {{"hidden_dim", cfg.hidden_dim},
                {"latent_dim", cfg.latent_dim},
                {"embed_dim", cfg.embed_dim},
                {"gcn_layers", cfg.gcn_layers},
                {"encoder", to_string(cfg.encoder)},
                {"embedding", to_string(cfg.embedding)},
                {"gcn_activation", activation_name(cfg.gcn_activation)},
                {"score_input_edges", cfg.score_input_edges}};
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : metadata) meta[k] = v;
  j["metadata"] = std::move(meta);

  ordered_json tensors = ordered_json::array();
  model.visit_parameters([&](const std::string& name, const Parameter& p) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.value.size()));
    // Row-major order.
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) data.push_back(p.value(i, c));
    }
    tensors.push_back({{"name", name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"trainable", p.trainable},
                       {"data", std::move(data)}});
  });
  j["tensors"] = std::move(tensors);
  out << j.dump() << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (field<std::string>(j, "format") != kFormat) {
    throw CheckpointError("not a gnas checkpoint");
  }
  const int version = field<int>(j, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto& js = j.at("space");
  SearchSpace space(field<int>(js, "num_op_layers"),
                    field<std::vector<std::string>>(js, "operations"));
  const auto& jm = j.at("model");
  ModelConfig cfg;
  cfg.hidden_dim = field<int>(jm, "hidden_dim");
  cfg.latent_dim = field<int>(jm, "latent_dim");
  cfg.embed_dim = field<int>(jm, "embed_dim");
  cfg.gcn_layers = field<int>(jm, "gcn_layers");
  cfg.encoder = parse_encoder_kind(field<std::string>(jm, "encoder"));
  cfg.embedding = parse_embedding_kind(field<std::string>(jm, "embedding"));
  cfg.gcn_activation = parse_activation(field<std::string>(jm, "gcn_activation"));
  cfg.score_input_edges = field<bool>(jm, "score_input_edges");

  Checkpoint ck{VaeModel(space, cfg, 0), {}};
  for (const auto& [k, v] : j.at("metadata").items()) ck.metadata[k] = v.get<std::string>();

  std::map<std::string, const ordered_json*> by_name;
  for (const auto& t : j.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;
  ck.model.visit_parameters([&](const std::string& name, Parameter& p) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks tensor '" + name + "'");
    const auto& t = *it->second;
    const auto rows = field<Eigen::Index>(t, "rows");
    const auto cols = field<Eigen::Index>(t, "cols");
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw CheckpointError("tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", expected " +
                            std::to_string(p.value.rows()) + "x" +
                            std::to_string(p.value.cols()));
    }
    const auto data = field<std::vector<double>>(t, "data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw CheckpointError("tensor '" + name + "' has the wrong number of values");
    }
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index c = 0; c < cols; ++c) p.value(i, c) = data[idx++];
    }
    p.trainable = field<bool>(t, "trainable");
    p.zero_grad();
  });
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const VaeModel& model,
                     const Metadata& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model, metadata);
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return read_checkpoint(in);
}

}  // namespace gnas
