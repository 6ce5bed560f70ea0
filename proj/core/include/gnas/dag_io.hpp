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

#ifndef GNAS_DAG_IO_HPP_
#define GNAS_DAG_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnas/dag.hpp"

namespace gnas {

// One dataset line: a DAG with an optional performance label.
struct DagRecord {
  ArchitectureDag dag;
  std::optional<double> perf;
};

// {"ops":[...],"edges":[[s,d],...],"perf":x}  ("perf" omitted when absent)
std::string serialize(const ArchitectureDag& dag,
                      std::optional<double> perf = std::nullopt);

// Throws ParseError (with line/field context) on malformed JSON or shapes, and
// on records that fail the structural checks of `space`.
DagRecord parse_record(std::string_view line, const SearchSpace& space,
                       std::size_t line_number = 1);

std::vector<DagRecord> read_jsonl(std::istream& in, const SearchSpace& space);
std::vector<DagRecord> read_jsonl(const std::filesystem::path& path,
                                  const SearchSpace& space);

void write_jsonl(std::ostream& out, std::span<const DagRecord> records);
void write_jsonl(const std::filesystem::path& path,
                 std::span<const DagRecord> records);

std::vector<ArchitectureDag> dags_of(std::span<const DagRecord> records);

}  // namespace gnas

#endif  // GNAS_DAG_IO_HPP_
