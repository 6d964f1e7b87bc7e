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

#ifndef PTSEARCH_EVOLVE_HPP_
#define PTSEARCH_EVOLVE_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ptsearch/pipeline.hpp"
#include "ptsearch/rng.hpp"

namespace ptsearch {

struct Individual {
  Genome genome;
  double fitness = 0.0;
  std::size_t birth = 0;
};

// Fixed-capacity FIFO: inserting into a full population evicts the oldest.
class Population {
 public:
  explicit Population(std::size_t capacity) : capacity_(capacity) {}

  // Returns the evicted individual, if any.
  std::optional<Individual> push(Individual ind);

  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Individual& operator[](std::size_t i) const { return members_[i]; }
  const std::deque<Individual>& members() const { return members_; }

 private:
  std::size_t capacity_;
  std::deque<Individual> members_;
};

enum class Mutation { kAddP, kAddT, kPToT, kTToP };

const char* mutation_name(Mutation m);

struct SearchConfig {
  std::size_t k = 20;            // population size
  std::size_t generations = 500;
  std::size_t m = 5;             // tournament size
  std::size_t init_lo = 2;       // interior length bounds of initial genomes
  std::size_t init_hi = 8;
  std::size_t max_len = 64;
  std::uint64_t seed = 0;

  // Throws ContractViolation unless 1 <= m < k, lo >= 1, lo <= hi and
  // max_len >= hi + 2.
  void validate() const;
};

// T + interior + T, interior length uniform in [lo, hi], ops i.i.d. uniform.
Genome random_genome(Engine& rng, std::size_t lo, std::size_t hi);

// Mutations that can be applied without breaking the leading/trailing T.
std::vector<Mutation> applicable_mutations(const Genome& g,
                                           std::size_t max_len);

// Applies one mutation at `position`: for insertions the index the new op
// takes (1..size-1); for replacements an interior index holding the right op.
Genome apply_mutation(const Genome& g, Mutation m, std::size_t position);

// Draws a mutation uniformly from the applicable ones, then a uniform valid
// position. Throws MutationError when nothing applies.
Genome mutate(const Genome& g, Engine& rng, std::size_t max_len);

// Samples m distinct members uniformly; returns the fittest, older wins ties.
const Individual& tournament_select(const Population& pop, std::size_t m,
                                    Engine& rng);

struct HistoryRecord {
  std::size_t gen = 0;
  Individual individual;
  // Birth index of the tournament winner; empty for the initial population.
  std::optional<std::size_t> parent_birth;

  // {"gen": ..., "genome": ..., "fitness": ..., "birth": ...}
  std::string to_json() const;
};

struct SearchResult {
  Individual best;
  std::vector<HistoryRecord> history;
  std::size_t evaluations = 0;
};

using FitnessFn = std::function<double(const Genome&)>;

// Called once per generation after the child enters and the oldest leaves.
using GenerationObserver = std::function<void(
    std::size_t gen, const Population& pop, const Individual& parent,
    const Individual& child, const Individual& evicted)>;

// Aging evolution. Each history line is written to `history_sink` (if given)
// and flushed as soon as the individual is evaluated, so a failing
// evaluation leaves a complete log of everything before it.
SearchResult evolve_search(const SearchConfig& config, const FitnessFn& fitness,
                           std::ostream* history_sink = nullptr,
                           const GenerationObserver& observer = {});

}  // namespace ptsearch

#endif  // PTSEARCH_EVOLVE_HPP_
