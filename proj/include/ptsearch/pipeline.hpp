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

#ifndef PTSEARCH_PIPELINE_HPP_
#define PTSEARCH_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptsearch/autodiff.hpp"
#include "ptsearch/graph.hpp"
#include "ptsearch/matrix.hpp"
#include "ptsearch/rng.hpp"

namespace ptsearch {

enum class Op : char { P = 'P', T = 'T' };

// A macro-architecture: an ordered sequence of propagation (P) and
// transformation (T) operations. Always non-empty and ending in T.
class Genome {
 public:
  Genome() = default;
  // Throws InvalidGenome if `ops` is empty or does not end with T.
  explicit Genome(std::vector<Op> ops);

  // Accepts the compact form ("TPPT", any case) and comma- or
  // space-separated forms ("T,P,P,T", "[T, P, P, T]").
  static Genome parse(std::string_view text);

  std::string str() const;
  std::span<const Op> ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  Op operator[](std::size_t i) const { return ops_[i]; }
  std::size_t count(Op op) const;
  // Positions (0-based) of P and T operations.
  std::vector<std::size_t> p_layers() const;
  std::vector<std::size_t> t_layers() const;

  bool operator==(const Genome&) const = default;

 private:
  std::vector<Op> ops_;
};

struct ModelDims {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
};

struct ModelFlags {
  bool gate = true;
  bool skip = true;
};

struct DropoutRates {
  double input = 0.0;
  double layer = 0.0;
};

struct PipelineModel {
  Genome genome;
  ModelDims dims;
  ModelFlags flags;
  DropoutRates dropout;
  // One weight per T operation, in genome order. No bias terms.
  std::vector<Parameter> weights;
  // Shared gate vector (hidden x 1); present iff flags.gate.
  std::optional<Parameter> gate;

  std::vector<Parameter*> parameters();
};

// Glorot-uniform weights from the `init` substream of `seed`; zero gate.
// Throws InvalidGenome when gating is on and the genome starts with P.
PipelineModel build_model(const Genome& genome, const ModelDims& dims,
                          const ModelFlags& flags, const DropoutRates& dropout,
                          std::uint64_t seed);

enum class Mode { kTrain, kEval };

struct ForwardOutput {
  Tensor logits;
  // o^(0) (input after input dropout) followed by o^(l) for every layer.
  std::vector<Tensor> layer_outputs;
  // Per-node softmax weights of each gated aggregation (N x #P so far).
  std::vector<Matrix> gate_weights;
};

// Runs the pipeline on `tape`. `adj` must be normalized and outlive the tape;
// `dropout_rng` is only read in training mode.
ForwardOutput forward(PipelineModel& model, Tape& tape, const SparseGraph& adj,
                      const Matrix& features, Mode mode, Engine* dropout_rng);

// Per-node smoothness of an N x h embedding (N >= 2).
Vector node_smoothness(const Matrix& embeddings);
// Mean node smoothness, in [0, 1].
double graph_smoothness(const Matrix& embeddings);

struct SmoothnessTrace {
  // values[0] is the input features; values[l] follows the l-th operation.
  std::vector<double> values;
  std::vector<Op> ops;
};

// Evaluation-mode forward recording graph smoothness after every layer.
SmoothnessTrace smoothness_trace(PipelineModel& model, const SparseGraph& adj,
                                 const Matrix& features);

}  // namespace ptsearch

#endif  // PTSEARCH_PIPELINE_HPP_
