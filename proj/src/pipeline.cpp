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

#include "ptsearch/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "ptsearch/errors.hpp"

namespace ptsearch {

Genome::Genome(std::vector<Op> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw InvalidGenome("genome is empty");
  if (ops_.back() != Op::T) {
    throw InvalidGenome("genome " + str() + " must end with T");
  }
}

Genome Genome::parse(std::string_view text) {
  std::vector<Op> ops;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'P':
        ops.push_back(Op::P);
        break;
      case 'T':
        ops.push_back(Op::T);
        break;
      case ',':
      case '-':
      case '[':
      case ']':
        break;
      default:
        if (std::isspace(static_cast<unsigned char>(c))) break;
        throw InvalidGenome("invalid character '" + std::string(1, c) +
                            "' at position " + std::to_string(i) +
                            " in genome '" + std::string(text) + "'");
    }
  }
  return Genome(std::move(ops));
}

std::string Genome::str() const {
  std::string s;
  s.reserve(ops_.size());
  for (Op op : ops_) s.push_back(static_cast<char>(op));
  return s;
}

std::size_t Genome::count(Op op) const {
  std::size_t n = 0;
  for (Op o : ops_) n += (o == op);
  return n;
}

std::vector<std::size_t> Genome::p_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (ops_[i] == Op::P) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Genome::t_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (ops_[i] == Op::T) out.push_back(i);
  }
  return out;
}

std::vector<Parameter*> PipelineModel::parameters() {
  std::vector<Parameter*> out;
  for (Parameter& w : weights) out.push_back(&w);
  if (gate) out.push_back(&*gate);
  return out;
}

PipelineModel build_model(const Genome& genome, const ModelDims& dims,
                          const ModelFlags& flags, const DropoutRates& dropout,
                          std::uint64_t seed) {
  if (genome.size() == 0) throw InvalidGenome("genome is empty");
  if (flags.gate && genome[0] != Op::T) {
    throw InvalidGenome("gating requires the genome to start with T, got " +
                        genome.str());
  }
  if (dims.input == 0 || dims.hidden == 0 || dims.classes == 0) {
    throw ContractViolation("build_model: zero dimension");
  }
  if (dropout.input < 0.0 || dropout.input >= 1.0 || dropout.layer < 0.0 ||
      dropout.layer >= 1.0) {
    throw ContractViolation("build_model: dropout rates must lie in [0, 1)");
  }

  PipelineModel m;
  m.genome = genome;
  m.dims = dims;
  m.flags = flags;
  m.dropout = dropout;

  Engine eng = Rng(seed).stream("init");
  const std::vector<std::size_t> ts = genome.t_layers();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::size_t fan_in = k == 0 ? dims.input : dims.hidden;
    const std::size_t fan_out = k + 1 == ts.size() ? dims.classes : dims.hidden;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Parameter w;
    w.name = "W" + std::to_string(ts[k] + 1);
    w.value.resize(static_cast<Eigen::Index>(fan_in),
                   static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index i = 0; i < w.value.size(); ++i) {
      w.value.data()[i] = uniform_real(eng, -limit, limit);
    }
    w.grad = Matrix::Zero(w.value.rows(), w.value.cols());
    m.weights.push_back(std::move(w));
  }
  if (flags.gate) {
    Parameter s;
    s.name = "gate";
    s.value = Matrix::Zero(static_cast<Eigen::Index>(dims.hidden), 1);
    s.grad = s.value;
    m.gate = std::move(s);
  }
  return m;
}

ForwardOutput forward(PipelineModel& model, Tape& tape, const SparseGraph& adj,
                      const Matrix& features, Mode mode, Engine* dropout_rng) {
  const Genome& g = model.genome;
  const std::size_t n_layers = g.size();
  if (static_cast<std::size_t>(features.rows()) != adj.num_nodes) {
    throw ContractViolation("forward: feature rows do not match graph size");
  }
  if (static_cast<std::size_t>(features.cols()) != model.dims.input) {
    throw ContractViolation("forward: feature width " +
                            std::to_string(features.cols()) +
                            " does not match model input " +
                            std::to_string(model.dims.input));
  }
  const bool training = mode == Mode::kTrain;
  if (training && dropout_rng == nullptr &&
      (model.dropout.input > 0.0 || model.dropout.layer > 0.0)) {
    throw ContractViolation("forward: training with dropout needs an rng");
  }
  Engine unused;
  Engine& rng = dropout_rng != nullptr ? *dropout_rng : unused;

  std::vector<Tensor> weights;
  for (Parameter& w : model.weights) weights.push_back(tape.parameter(w));
  std::optional<Tensor> gate;
  if (model.flags.gate && model.gate) gate = tape.parameter(*model.gate);

  ForwardOutput out;
  // Index l holds o^(l); z holds the raw propagated embedding of P layers.
  std::vector<Tensor> o;
  std::vector<Tensor> z(n_layers + 1);
  o.push_back(ad::dropout(tape.constant_ref(features), model.dropout.input,
                          training, rng));

  std::vector<std::size_t> p_seen;  // 1-based indices of P layers so far
  std::vector<std::size_t> t_seen;  // 1-based indices of T layers so far
  std::size_t t_count = 0;

  for (std::size_t l = 1; l <= n_layers; ++l) {
    const Op op = g[l - 1];
    if (op == Op::P) {
      z[l] = ad::spmm_const(adj, o[l - 1]);
      p_seen.push_back(l);
      const bool next_is_t = l < n_layers && g[l] == Op::T;
      if (!(gate && next_is_t)) {
        o.push_back(z[l]);
        continue;
      }
      // Node-adaptive combination of every propagated embedding so far.
      std::vector<Tensor> scores;
      for (std::size_t i : p_seen) {
        scores.push_back(ad::sigmoid(ad::matmul(z[i], *gate)));
      }
      const Tensor weights_per_node =
          ad::row_softmax(ad::concat_cols(scores));
      out.gate_weights.push_back(weights_per_node.value());
      Tensor combined;
      for (std::size_t k = 0; k < p_seen.size(); ++k) {
        Tensor term = ad::scale_cols(
            z[p_seen[k]],
            ad::column(weights_per_node, static_cast<Eigen::Index>(k)));
        combined = k == 0 ? term : ad::add(combined, term);
      }
      o.push_back(combined);
    } else {
      Tensor input = o[l - 1];
      if (model.flags.skip && !t_seen.empty()) {
        // m(l) = t_seen.back(); add the outputs of all T layers before it.
        for (std::size_t k = 0; k + 1 < t_seen.size(); ++k) {
          input = ad::add(input, o[t_seen[k]]);
        }
      }
      const bool final_t = l == n_layers;
      Tensor h = ad::matmul(
          ad::dropout(input, model.dropout.layer, training, rng),
          weights[t_count]);
      o.push_back(final_t ? h : ad::relu(h));
      t_seen.push_back(l);
      ++t_count;
    }
  }
  out.logits = o.back();
  out.layer_outputs = std::move(o);
  return out;
}

}  // namespace ptsearch
