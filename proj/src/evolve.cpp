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

#include "ptsearch/evolve.hpp"

#include <algorithm>
#include <string>

#include "json.hpp"
#include "ptsearch/errors.hpp"

namespace ptsearch {

std::optional<Individual> Population::push(Individual ind) {
  members_.push_back(std::move(ind));
  if (members_.size() <= capacity_) return std::nullopt;
  Individual oldest = std::move(members_.front());
  members_.pop_front();
  return oldest;
}

const char* mutation_name(Mutation m) {
  switch (m) {
    case Mutation::kAddP:
      return "+P";
    case Mutation::kAddT:
      return "+T";
    case Mutation::kPToT:
      return "P->T";
    case Mutation::kTToP:
      return "T->P";
  }
  return "?";
}

void SearchConfig::validate() const {
  if (m < 1 || m >= k) {
    throw ContractViolation("search: tournament size must satisfy 1 <= m < k");
  }
  if (init_lo < 1 || init_lo > init_hi) {
    throw ContractViolation("search: need 1 <= init_lo <= init_hi");
  }
  if (max_len < init_hi + 2) {
    throw ContractViolation("search: max_len must be at least init_hi + 2");
  }
}

Genome random_genome(Engine& rng, std::size_t lo, std::size_t hi) {
  if (lo > hi) throw ContractViolation("random_genome: lo > hi");
  const std::size_t len = lo + uniform_index(rng, hi - lo + 1);
  std::vector<Op> ops{Op::T};
  for (std::size_t i = 0; i < len; ++i) {
    ops.push_back(uniform_index(rng, 2) == 0 ? Op::P : Op::T);
  }
  ops.push_back(Op::T);
  return Genome(std::move(ops));
}

namespace {

std::vector<std::size_t> interior_positions(const Genome& g, Op op) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    if (g[i] == op) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<Mutation> applicable_mutations(const Genome& g,
                                           std::size_t max_len) {
  std::vector<Mutation> out;
  if (g.size() < max_len && g.size() >= 1) {
    out.push_back(Mutation::kAddP);
    out.push_back(Mutation::kAddT);
  }
  if (!interior_positions(g, Op::P).empty()) out.push_back(Mutation::kPToT);
  if (!interior_positions(g, Op::T).empty()) out.push_back(Mutation::kTToP);
  return out;
}

Genome apply_mutation(const Genome& g, Mutation m, std::size_t position) {
  std::vector<Op> ops(g.ops().begin(), g.ops().end());
  switch (m) {
    case Mutation::kAddP:
    case Mutation::kAddT:
      if (position < 1 || position > ops.size() - 1) {
        throw MutationError("insertion position " + std::to_string(position) +
                            " outside [1, " + std::to_string(ops.size() - 1) +
                            "]");
      }
      ops.insert(ops.begin() + static_cast<std::ptrdiff_t>(position),
                 m == Mutation::kAddP ? Op::P : Op::T);
      break;
    case Mutation::kPToT:
    case Mutation::kTToP: {
      const Op from = m == Mutation::kPToT ? Op::P : Op::T;
      if (position < 1 || position + 1 >= ops.size() || ops[position] != from) {
        throw MutationError(std::string(mutation_name(m)) +
                            " cannot apply at position " +
                            std::to_string(position) + " of " + g.str());
      }
      ops[position] = from == Op::P ? Op::T : Op::P;
      break;
    }
  }
  return Genome(std::move(ops));
}

Genome mutate(const Genome& g, Engine& rng, std::size_t max_len) {
  const std::vector<Mutation> options = applicable_mutations(g, max_len);
  if (options.empty()) {
    throw MutationError("no applicable mutation for " + g.str());
  }
  const Mutation m = options[uniform_index(rng, options.size())];
  std::size_t position = 0;
  switch (m) {
    case Mutation::kAddP:
    case Mutation::kAddT:
      position = 1 + uniform_index(rng, g.size() - 1);
      break;
    case Mutation::kPToT:
    case Mutation::kTToP: {
      const auto slots =
          interior_positions(g, m == Mutation::kPToT ? Op::P : Op::T);
      position = slots[uniform_index(rng, slots.size())];
      break;
    }
  }
  return apply_mutation(g, m, position);
}

const Individual& tournament_select(const Population& pop, std::size_t m,
                                    Engine& rng) {
  if (m < 1 || m > pop.size()) {
    throw ContractViolation("tournament_select: need 1 <= m <= population");
  }
  // Partial Fisher-Yates over member indices.
  std::vector<std::size_t> idx(pop.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Individual* best = nullptr;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + uniform_index(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
    const Individual& cand = pop[idx[i]];
    if (best == nullptr || cand.fitness > best->fitness ||
        (cand.fitness == best->fitness && cand.birth < best->birth)) {
      best = &cand;
    }
  }
  return *best;
}

std::string HistoryRecord::to_json() const {
  nlohmann::ordered_json j;
  j["gen"] = gen;
  j["genome"] = individual.genome.str();
  j["fitness"] = individual.fitness;
  j["birth"] = individual.birth;
  return j.dump();
}

SearchResult evolve_search(const SearchConfig& config, const FitnessFn& fitness,
                           std::ostream* history_sink,
                           const GenerationObserver& observer) {
  config.validate();
  const Rng rng(config.seed);
  Engine mutation_rng = rng.stream("mutation");
  Engine tournament_rng = rng.stream("tournament");

  SearchResult result;
  Population pop(config.k);
  std::size_t next_birth = 0;
  bool have_best = false;

  auto evaluate = [&](Genome genome, std::size_t gen,
                      std::optional<std::size_t> parent) -> Individual {
    Individual ind;
    ind.genome = std::move(genome);
    ind.birth = next_birth++;
    ind.fitness = fitness(ind.genome);
    ++result.evaluations;
    HistoryRecord rec{gen, ind, parent};
    if (history_sink != nullptr) {
      *history_sink << rec.to_json() << '\n';
      history_sink->flush();
    }
    result.history.push_back(std::move(rec));
    // Strict improvement keeps the earliest-born among equals.
    if (!have_best || ind.fitness > result.best.fitness) {
      result.best = ind;
      have_best = true;
    }
    return ind;
  };

  for (std::size_t i = 0; i < config.k; ++i) {
    pop.push(evaluate(
        random_genome(mutation_rng, config.init_lo, config.init_hi), 0,
        std::nullopt));
  }

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    // Copy: the parent may be evicted by the push below.
    const Individual parent = tournament_select(pop, config.m, tournament_rng);
    Genome offspring = mutate(parent.genome, mutation_rng, config.max_len);
    Individual child = evaluate(std::move(offspring), gen, parent.birth);
    std::optional<Individual> evicted = pop.push(child);
    if (observer) observer(gen, pop, parent, child, *evicted);
  }
  return result;
}

}  // namespace ptsearch
