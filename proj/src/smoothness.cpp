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

#include <algorithm>
#include <cmath>

#include "ptsearch/errors.hpp"
#include "ptsearch/pipeline.hpp"

namespace ptsearch {

Vector node_smoothness(const Matrix& e) {
  const Eigen::Index n = e.rows();
  if (n < 2) {
    throw ContractViolation("node_smoothness: needs at least two nodes");
  }
  Matrix unit = e;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Rows zeroed by a rectifier get the 1e-12 floor instead of an error.
    unit.row(i) /= std::max(e.row(i).norm(), 1e-12);
  }
  Vector dist_sum = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (unit.row(i) - unit.row(j)).norm();
      dist_sum(i) += d;
      dist_sum(j) += d;
    }
  }
  const double denom = 2.0 * static_cast<double>(n) - 2.0;
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i) = std::clamp(1.0 - dist_sum(i) / denom, 0.0, 1.0);
  }
  return s;
}

double graph_smoothness(const Matrix& e) { return node_smoothness(e).mean(); }

SmoothnessTrace smoothness_trace(PipelineModel& model, const SparseGraph& adj,
                                 const Matrix& features) {
  Tape tape(false);
  const ForwardOutput fo =
      forward(model, tape, adj, features, Mode::kEval, nullptr);
  SmoothnessTrace trace;
  trace.values.reserve(fo.layer_outputs.size());
  for (const Tensor& t : fo.layer_outputs) {
    trace.values.push_back(graph_smoothness(t.value()));
  }
  trace.ops.assign(model.genome.ops().begin(), model.genome.ops().end());
  return trace;
}

}  // namespace ptsearch
