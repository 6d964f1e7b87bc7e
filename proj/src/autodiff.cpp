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

#include "ptsearch/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "ptsearch/errors.hpp"

namespace ptsearch {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ContractViolation(std::string(op) + ": operands on different tapes");
  }
}

}  // namespace

const Matrix& Tensor::value() const {
  if (tape_ == nullptr) throw ContractViolation("empty tensor handle");
  return tape_->value(id_);
}

Matrix Tensor::grad() const { return tape_->grad(id_); }

bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Tensor Tape::constant_ref(const Matrix& value) {
  Node n;
  n.borrowed = &value;
  return push(std::move(n));
}

Tensor Tape::variable(Matrix value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = record_gradients_;
  return push(std::move(n));
}

Tensor Tape::parameter(Parameter& p) {
  Node n;
  n.borrowed = &p.value;
  if (record_gradients_) {
    n.requires_grad = true;
    n.param = &p;
  }
  return push(std::move(n));
}

Tensor Tape::record(const char* op, Matrix value, std::vector<Tensor> inputs,
                    BackwardRule rule) {
  if (!value.allFinite()) {
    throw NonFiniteValue(std::string(op) + " produced a non-finite value");
  }
  Node n;
  n.owned = std::move(value);
  if (record_gradients_) {
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [](const Tensor& t) {
                                    return t.requires_grad();
                                  });
    if (n.requires_grad) n.rule = std::move(rule);
  }
  return push(std::move(n));
}

const Matrix& Tape::value(std::size_t id) const { return nodes_.at(id).value(); }

Matrix Tape::grad(std::size_t id) const {
  const Node& n = nodes_.at(id);
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value().rows(), n.value().cols());
}

void Tape::accumulate(const Tensor& t, const Matrix& g) {
  Node& n = nodes_[t.id()];
  if (!n.requires_grad) return;
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = g;
    n.has_grad = true;
  }
}

void Tape::backward(const Tensor& loss, double seed) {
  if (loss.tape() != this) {
    throw ContractViolation("backward: loss belongs to another tape");
  }
  const Matrix& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractViolation("backward: loss must be 1x1, got " + shape(lv));
  }
  for (Node& n : nodes_) {
    n.grad.resize(0, 0);
    n.has_grad = false;
    if (n.param != nullptr) {
      n.param->grad = Matrix::Zero(n.value().rows(), n.value().cols());
    }
  }
  accumulate(loss, Matrix::Constant(1, 1, seed));
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.rule) n.rule(*this, n.grad);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

namespace ad {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: " + shape(a.value()) + " * " +
                            shape(b.value()));
  }
  // Constant, mostly-zero left operands (bag-of-words features after
  // dropout) go through a sparse product.
  if (!a.requires_grad() && a.value().size() > 0 &&
      (a.value().array() != 0.0).count() * 10 < a.value().size()) {
    auto sp = std::make_shared<const SparseRowMatrix>(a.value().sparseView());
    Matrix out = *sp * b.value();
    return a.tape()->record("matmul", std::move(out), {a, b},
                            [sp, b](Tape& t, const Matrix& g) {
                              t.accumulate(b, Matrix(sp->transpose() * g));
                            });
  }
  Matrix out = a.value() * b.value();
  return a.tape()->record("matmul", std::move(out), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            if (a.requires_grad()) {
                              t.accumulate(a, g * b.value().transpose());
                            }
                            if (b.requires_grad()) {
                              t.accumulate(b, a.value().transpose() * g);
                            }
                          });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation("add: " + shape(a.value()) + " + " +
                            shape(b.value()));
  }
  Matrix out = a.value() + b.value();
  return a.tape()->record("add", std::move(out), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            t.accumulate(a, g);
                            t.accumulate(b, g);
                          });
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(
      "relu", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a, (a.value().array() > 0.0).select(g, 0.0).matrix());
      });
}

Tensor sigmoid(const Tensor& a) {
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record("sigmoid", std::move(out), {a},
                      [a, self](Tape& t, const Matrix& g) {
                        const auto y = t.value(self).array();
                        t.accumulate(a, (g.array() * y * (1.0 - y)).matrix());
                      });
}

Tensor row_softmax(const Tensor& a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record(
      "row_softmax", std::move(out), {a}, [a, self](Tape& t, const Matrix& g) {
        const Matrix& y = t.value(self);
        // dx = y * (g - <g, y>) per row.
        const Vector dots = (g.array() * y.array()).rowwise().sum();
        Matrix dx = y.array() * (g.colwise() - dots).array();
        t.accumulate(a, dx);
      });
}

Tensor scale_cols(const Tensor& a, const Tensor& w) {
  require_same_tape(a, w, "scale_cols");
  if (w.cols() != 1 || w.rows() != a.rows()) {
    throw ContractViolation("scale_cols: weights " + shape(w.value()) +
                            " for operand " + shape(a.value()));
  }
  Matrix out = a.value().array().colwise() * w.value().col(0).array();
  return a.tape()->record(
      "scale_cols", std::move(out), {a, w}, [a, w](Tape& t, const Matrix& g) {
        if (a.requires_grad()) {
          t.accumulate(a, (g.array().colwise() * w.value().col(0).array())
                              .matrix());
        }
        if (w.requires_grad()) {
          t.accumulate(w, (g.array() * a.value().array()).rowwise().sum()
                              .matrix());
        }
      });
}

Tensor sum(const Tensor& a) {
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  return a.tape()->record(
      "sum", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
      });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no operands");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Tensor& p : parts) {
    require_same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) {
      throw ContractViolation("concat_cols: row counts differ");
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Tensor& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return parts.front().tape()->record(
      "concat_cols", std::move(out), inputs,
      [inputs](Tape& t, const Matrix& g) {
        Eigen::Index off = 0;
        for (const Tensor& p : inputs) {
          if (p.requires_grad()) t.accumulate(p, g.middleCols(off, p.cols()));
          off += p.cols();
        }
      });
}

Tensor column(const Tensor& a, Eigen::Index j) {
  if (j < 0 || j >= a.cols()) {
    throw ContractViolation("column: index " + std::to_string(j) +
                            " out of range for " + shape(a.value()));
  }
  Matrix out = a.value().col(j);
  return a.tape()->record("column", std::move(out), {a},
                          [a, j](Tape& t, const Matrix& g) {
                            Matrix full = Matrix::Zero(a.rows(), a.cols());
                            full.col(j) = g.col(0);
                            t.accumulate(a, full);
                          });
}

Tensor spmm_const(const SparseGraph& adj, const Tensor& h) {
  Matrix out = spmm(adj, h.value());
  return h.tape()->record("spmm", std::move(out), {h},
                          [&adj, h](Tape& t, const Matrix& g) {
                            t.accumulate(h, spmm_transposed(adj, g));
                          });
}

Tensor dropout(const Tensor& h, double rate, bool training, Engine& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractViolation("dropout: rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) return h;
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(h.rows(), h.cols());
  // Zero entries of a constant stay zero whatever the mask says, so they
  // consume no draws.
  const bool skip_zeros = !h.requires_grad();
  const double* v = h.value().data();
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (skip_zeros && v[i] == 0.0) {
      mask.data()[i] = 0.0;
      continue;
    }
    mask.data()[i] = bernoulli(rng, 1.0 - rate) ? keep_scale : 0.0;
  }
  Matrix out = h.value().cwiseProduct(mask);
  return h.tape()->record("dropout", std::move(out), {h},
                          [h, mask = std::move(mask)](Tape& t,
                                                      const Matrix& g) {
                            t.accumulate(h, g.cwiseProduct(mask));
                          });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                             std::span<const std::size_t> mask) {
  if (mask.empty()) {
    throw ContractViolation("softmax_cross_entropy: empty mask");
  }
  const Matrix& x = logits.value();
  if (labels.size() != static_cast<std::size_t>(x.rows())) {
    throw ContractViolation("softmax_cross_entropy: label count mismatch");
  }
  Matrix probs(static_cast<Eigen::Index>(mask.size()), x.cols());
  double total = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(mask[k]);
    if (r >= x.rows()) {
      throw ContractViolation("softmax_cross_entropy: mask index out of range");
    }
    const int y = labels[mask[k]];
    if (y < 0 || y >= x.cols()) {
      throw ContractViolation("softmax_cross_entropy: label out of range");
    }
    const double mx = x.row(r).maxCoeff();
    const auto shifted = (x.row(r).array() - mx).eval();
    const double lse = std::log(shifted.exp().sum());
    total += lse - shifted(y);
    probs.row(static_cast<Eigen::Index>(k)) = (shifted - lse).exp().matrix();
  }
  const double n = static_cast<double>(mask.size());
  std::vector<std::size_t> rows(mask.begin(), mask.end());
  std::vector<int> ys(labels.begin(), labels.end());
  return logits.tape()->record(
      "softmax_cross_entropy", Matrix::Constant(1, 1, total / n), {logits},
      [logits, rows = std::move(rows), ys = std::move(ys),
       probs = std::move(probs), n](Tape& t, const Matrix& g) {
        Matrix dx = Matrix::Zero(logits.rows(), logits.cols());
        const double scale = g(0, 0) / n;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          const auto r = static_cast<Eigen::Index>(rows[k]);
          dx.row(r) += scale * probs.row(static_cast<Eigen::Index>(k));
          dx(r, ys[rows[k]]) -= scale;
        }
        t.accumulate(logits, dx);
      });
}

}  // namespace ad

void adam_step(std::span<Parameter* const> params, AdamState& s, double lr,
               double weight_decay) {
  if (s.first_moment.empty()) {
    for (const Parameter* p : params) {
      s.first_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      s.second_moment.push_back(
          Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (s.first_moment.size() != params.size()) {
    throw ContractViolation("adam_step: parameter count changed");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      throw ContractViolation("adam_step: gradient shape mismatch for " +
                              p.name);
    }
    Matrix g = p.grad;
    if (weight_decay != 0.0) g += weight_decay * p.value;
    Matrix& m = s.first_moment[i];
    Matrix& v = s.second_moment[i];
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    p.value.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
  }
}

GradCheckReport finite_diff_check(const LossBuilder& loss,
                                  std::span<Parameter* const> params,
                                  double eps) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    Tensor l = loss(tape);
    tape.backward(l);
    for (const Parameter* p : params) analytic.push_back(p->grad);
  }
  auto eval = [&] {
    Tape tape(false);
    return loss(tape).value()(0, 0);
  };

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Matrix& value = params[pi]->value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + eps;
      const double up = eval();
      value.data()[i] = saved - eps;
      const double down = eval();
      value.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi].data()[i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = pi;
        report.worst_index = i;
      }
      ++report.entries_checked;
    }
  }
  return report;
}

}  // namespace ptsearch
