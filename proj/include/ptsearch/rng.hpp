// Copyright 2026 The ptsearch Authors.
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

#ifndef PTSEARCH_RNG_HPP_
#define PTSEARCH_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace ptsearch {

using Engine = std::mt19937_64;

// Derives the seed of a named substream. The mapping depends only on the root
// seed and the name, so features can draw in any order without disturbing
// each other's sequences.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

// Root seed plus named substreams (`init`, `dropout`, `mutation`,
// `tournament`, `sbm`, ...).
class Rng {
 public:
  explicit Rng(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const { return root_; }
  Engine stream(std::string_view name) const {
    return Engine(derive_seed(root_, name));
  }

 private:
  std::uint64_t root_;
};

// Distribution helpers implemented directly on the engine output so that
// draws are identical across standard library implementations.
double uniform01(Engine& engine);
std::size_t uniform_index(Engine& engine, std::size_t n);
bool bernoulli(Engine& engine, double p);
double standard_normal(Engine& engine);
double uniform_real(Engine& engine, double lo, double hi);

}  // namespace ptsearch

#endif  // PTSEARCH_RNG_HPP_
