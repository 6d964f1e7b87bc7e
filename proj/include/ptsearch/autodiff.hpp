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

#ifndef PTSEARCH_AUTODIFF_HPP_
#define PTSEARCH_AUTODIFF_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ptsearch/graph.hpp"
#include "ptsearch/matrix.hpp"
#include "ptsearch/rng.hpp"

namespace ptsearch {

// A trainable matrix. `grad` is written by Tape::backward.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid while the tape
// lives.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Gradient accumulated by the last backward pass (zero if unreached).
  Matrix grad() const;
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records dense-matrix operations in execution order and replays their local
// gradient rules in reverse.
class Tape {
 public:
  // Receives the upstream gradient of a node and adds into its inputs.
  using BackwardRule = std::function<void(Tape&, const Matrix& upstream)>;

  // A tape created with record_gradients=false treats parameters as
  // constants and stores no backward rules (evaluation passes).
  explicit Tape(bool record_gradients = true)
      : record_gradients_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Matrix value);
  // Constant that refers to caller-owned storage; `value` must outlive the
  // tape.
  Tensor constant_ref(const Matrix& value);
  // Differentiable leaf that is not a Parameter (used by tests and checks).
  Tensor variable(Matrix value);
  Tensor parameter(Parameter& p);

  // Appends an operation. `inputs` are the operands whose gradients the rule
  // may write through accumulate().
  Tensor record(const char* op, Matrix value, std::vector<Tensor> inputs,
                BackwardRule rule);

  // Reverse pass from a 1x1 loss. Every parameter registered on this tape
  // receives d(seed * loss)/d(param); unreachable ones receive zero.
  void backward(const Tensor& loss, double seed = 1.0);

  void accumulate(const Tensor& t, const Matrix& g);

  const Matrix& value(std::size_t id) const;
  Matrix grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool recording() const { return record_gradients_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* borrowed = nullptr;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardRule rule;
    Parameter* param = nullptr;

    const Matrix& value() const { return borrowed ? *borrowed : owned; }
  };

  Tensor push(Node node);

  // Deque keeps node addresses stable while operations are appended.
  std::deque<Node> nodes_;
  bool record_gradients_;
};

namespace ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor row_softmax(const Tensor& a);
// Multiplies row i of `a` by w(i, 0); w is a column vector with rows(a) rows.
Tensor scale_cols(const Tensor& a, const Tensor& w);
// Sum of every entry, as a 1x1 tensor.
Tensor sum(const Tensor& a);
// Horizontal concatenation of tensors with equal row counts.
Tensor concat_cols(std::span<const Tensor> parts);
// Column `j` of `a` as an rows(a) x 1 tensor.
Tensor column(const Tensor& a, Eigen::Index j);

// Propagation by a constant adjacency; the gradient is a^T * upstream.
Tensor spmm_const(const SparseGraph& a, const Tensor& h);

// Inverted dropout. In eval mode, or with rate 0, returns `h` itself.
Tensor dropout(const Tensor& h, double rate, bool training, Engine& rng);

// Mean over `mask` rows of -log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                             std::span<const std::size_t> mask);

}  // namespace ad

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

// One Adam update with bias correction. Weight decay is added to the
// gradient as weight_decay * param before the moment updates.
void adam_step(std::span<Parameter* const> params, AdamState& state,
               double lr, double weight_decay);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Eigen::Index worst_index = 0;
  std::size_t entries_checked = 0;
};

// Builds the loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Tensor(Tape&)>;

// Compares reverse-mode gradients against central differences
// (f(x+eps) - f(x-eps)) / 2eps, entry by entry. Relative error uses the
// denominator max(|a|, |b|, 1e-8).
GradCheckReport finite_diff_check(const LossBuilder& loss,
                                  std::span<Parameter* const> params,
                                  double eps = 1e-5);

}  // namespace ptsearch

#endif  // PTSEARCH_AUTODIFF_HPP_
