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

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "gnas/error.hpp"
#include "gnas/train.hpp"

namespace gnas {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::kRelu;
  if (text == "tanh") return Activation::kTanh;
  if (text == "sigmoid") return Activation::kSigmoid;
  if (text == "identity" || text == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + text + "'");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  return "relu";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

constexpr const char* kRequired[] = {"epochs",    "iterations", "batch_size", "learning_rate",
                                     "kl_weight", "seed",       "encoder",    "embedding"};

constexpr const char* kOptional[] = {"hidden_dim",     "latent_dim",        "embed_dim",
                                     "gcn_layers",     "gcn_activation",    "score_input_edges",
                                     "train_fraction", "carry_all_weights", "num_op_layers",
                                     "operations"};

}  // namespace

TrainConfig parse_train_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    std::string key(trim(view.substr(0, eq)));
    std::string value(trim(view.substr(eq + 1)));
    bool known = false;
    for (const char* k : kRequired) known = known || key == k;
    for (const char* k : kOptional) known = known || key == k;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate config key '" + key + "'");
  }
  for (const char* k : kRequired) {
    if (!kv.contains(k)) throw ConfigError(std::string("missing config key '") + k + "'");
  }

  TrainConfig c;
  c.epochs = parse_number<int>("epochs", kv["epochs"]);
  c.iterations = parse_number<int>("iterations", kv["iterations"]);
  c.batch_size = parse_number<int>("batch_size", kv["batch_size"]);
  c.learning_rate = parse_number<double>("learning_rate", kv["learning_rate"]);
  c.kl_weight = parse_number<double>("kl_weight", kv["kl_weight"]);
  c.seed = parse_number<std::uint64_t>("seed", kv["seed"]);
  try {
    c.model.encoder = parse_encoder_kind(kv["encoder"]);
    c.model.embedding = parse_embedding_kind(kv["embedding"]);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  auto opt = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = opt("hidden_dim")) c.model.hidden_dim = parse_number<int>("hidden_dim", *v);
  if (auto v = opt("latent_dim")) c.model.latent_dim = parse_number<int>("latent_dim", *v);
  if (auto v = opt("embed_dim")) c.model.embed_dim = parse_number<int>("embed_dim", *v);
  if (auto v = opt("gcn_layers")) c.model.gcn_layers = parse_number<int>("gcn_layers", *v);
  if (auto v = opt("gcn_activation")) c.model.gcn_activation = parse_activation(*v);
  if (auto v = opt("score_input_edges")) {
    c.model.score_input_edges = parse_bool("score_input_edges", *v);
  }
  if (auto v = opt("train_fraction")) {
    c.train_fraction = parse_number<double>("train_fraction", *v);
  }
  if (auto v = opt("carry_all_weights")) {
    c.carry_all_weights = parse_bool("carry_all_weights", *v);
  }
  int layers = c.space.num_op_layers();
  std::vector<std::string> ops = c.space.operations();
  if (auto v = opt("num_op_layers")) layers = parse_number<int>("num_op_layers", *v);
  if (auto v = opt("operations")) ops = split_list(*v);
  try {
    c.space = SearchSpace(layers, ops);
  } catch (const Error& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
  if (c.model.hidden_dim < 1 || c.model.latent_dim < 1 || c.model.embed_dim < 1 ||
      c.model.gcn_layers < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  c.check();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_train_config(in);
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "epochs = " << c.epochs << "\n"
      << "iterations = " << c.iterations << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "learning_rate = " << c.learning_rate << "\n"
      << "kl_weight = " << c.kl_weight << "\n"
      << "seed = " << c.seed << "\n"
      << "encoder = " << to_string(c.model.encoder) << "\n"
      << "embedding = " << to_string(c.model.embedding) << "\n"
      << "hidden_dim = " << c.model.hidden_dim << "\n"
      << "latent_dim = " << c.model.latent_dim << "\n"
      << "embed_dim = " << c.model.embed_dim << "\n"
      << "gcn_layers = " << c.model.gcn_layers << "\n"
      << "gcn_activation = " << activation_name(c.model.gcn_activation) << "\n"
      << "score_input_edges = " << (c.model.score_input_edges ? "true" : "false") << "\n"
      << "train_fraction = " << c.train_fraction << "\n"
      << "carry_all_weights = " << (c.carry_all_weights ? "true" : "false") << "\n"
      << "num_op_layers = " << c.space.num_op_layers() << "\n"
      << "operations = ";
  for (std::size_t i = 0; i < c.space.operations().size(); ++i) {
    out << (i ? "," : "") << c.space.operations()[i];
  }
  out << "\n";
  return out.str();
}

}  // namespace gnas
