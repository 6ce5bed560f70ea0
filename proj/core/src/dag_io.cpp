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

#include "gnas/dag_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gnas/error.hpp"
#include "json.hpp"

namespace gnas {

using nlohmann::ordered_json;

std::string serialize(const ArchitectureDag& dag, std::optional<double> perf) {
  ordered_json j;
  j["ops"] = std::vector<int>(dag.ops().begin(), dag.ops().end());
  ordered_json edges = ordered_json::array();
  for (const Edge& e : dag.edges()) edges.push_back({e.src, e.dst});
  j["edges"] = std::move(edges);
  if (perf) j["perf"] = *perf;
  return j.dump();
}

DagRecord parse_record(std::string_view line, const SearchSpace& space,
                       std::size_t line_number) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(line_number, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_number, "", "record must be a JSON object");

  auto ops_it = j.find("ops");
  if (ops_it == j.end()) throw ParseError(line_number, "ops", "missing");
  if (!ops_it->is_array()) throw ParseError(line_number, "ops", "must be an array");
  std::vector<int> ops;
  for (const auto& v : *ops_it) {
    if (!v.is_number_integer()) throw ParseError(line_number, "ops", "entries must be integers");
    ops.push_back(v.get<int>());
  }

  auto edges_it = j.find("edges");
  if (edges_it == j.end()) throw ParseError(line_number, "edges", "missing");
  if (!edges_it->is_array()) throw ParseError(line_number, "edges", "must be an array");
  std::vector<Edge> edges;
  for (const auto& e : *edges_it) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw ParseError(line_number, "edges", "entries must be [src, dst] integer pairs");
    }
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }

  std::optional<double> perf;
  if (auto perf_it = j.find("perf"); perf_it != j.end() && !perf_it->is_null()) {
    if (!perf_it->is_number()) throw ParseError(line_number, "perf", "must be a number");
    perf = perf_it->get<double>();
  }

  try {
    return DagRecord{ArchitectureDag::create(std::move(ops), std::move(edges), space), perf};
  } catch (const MalformedDag& e) {
    throw ParseError(line_number, "", e.what());
  }
}

std::vector<DagRecord> read_jsonl(std::istream& in, const SearchSpace& space) {
  std::vector<DagRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_record(line, space, line_number));
  }
  return records;
}

std::vector<DagRecord> read_jsonl(const std::filesystem::path& path,
                                  const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return read_jsonl(in, space);
}

void write_jsonl(std::ostream& out, std::span<const DagRecord> records) {
  for (const auto& r : records) out << serialize(r.dag, r.perf) << '\n';
}

void write_jsonl(const std::filesystem::path& path, std::span<const DagRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_jsonl(out, records);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<ArchitectureDag> dags_of(std::span<const DagRecord> records) {
  std::vector<ArchitectureDag> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.dag);
  return out;
}

}  // namespace gnas
