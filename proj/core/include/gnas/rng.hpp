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

#ifndef GNAS_RNG_HPP_
#define GNAS_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace gnas {

using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream of a root seed, so that
// e.g. "data", "init", "train" and "bo" can be reproduced independently.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index);

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
  return Rng(derive_seed(root, stream));
}

inline Rng make_rng(std::uint64_t root, std::string_view stream,
                    std::uint64_t index) {
  return Rng(derive_seed(root, stream, index));
}

// Standard normal / uniform draws. These avoid std::normal_distribution so
// that streams stay bit-identical across standard library implementations.
double standard_normal(Rng& rng);
double uniform01(Rng& rng);

}  // namespace gnas

#endif  // GNAS_RNG_HPP_
