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

#ifndef GNAS_CHECKPOINT_HPP_
#define GNAS_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "gnas/model.hpp"

namespace gnas {

inline constexpr int kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

struct Checkpoint {
  VaeModel model;
  Metadata metadata;
};

// JSON container: versioned header, search space, model configuration, free
// metadata, and every named tensor with its shape and 64-bit values (written
// with round-trip precision, so save/load is bit-exact).
void write_checkpoint(std::ostream& out, const VaeModel& model,
                      const Metadata& metadata = {});
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const VaeModel& model,
                     const Metadata& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gnas

#endif  // GNAS_CHECKPOINT_HPP_
