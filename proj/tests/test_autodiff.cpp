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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "oracles.hpp"
#include "ptsearch/autodiff.hpp"
#include "ptsearch/errors.hpp"

using namespace ptsearch;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Engine eng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(eng);
  return m;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// sum(L * f(x) * R) with random constants, so every output entry receives a
// distinct upstream gradient.
using UnaryOp = std::function<Tensor(const Tensor&)>;

double primitive_fd_error(const UnaryOp& f, Matrix x0, Eigen::Index out_rows,
                          Eigen::Index out_cols, std::uint64_t seed) {
  Parameter x{"x", std::move(x0), {}};
  const Matrix l = random_matrix(3, out_rows, seed + 1);
  const Matrix r = random_matrix(out_cols, 2, seed + 2);
  std::vector<Parameter*> params{&x};
  const GradCheckReport rep = finite_diff_check(
      [&](Tape& t) {
        return ad::sum(ad::matmul(ad::matmul(t.constant(l), f(t.parameter(x))),
                                  t.constant(r)));
      },
      params);
  return rep.max_rel_error;
}

}  // namespace

TEST_CASE("matmul of scalars and its product rule") {
  Tape t;
  Tensor a = t.variable(scalar(2));
  Tensor b = t.variable(scalar(3));
  Tensor c = ad::matmul(a, b);
  CHECK(c.value()(0, 0) == 6.0);
  t.backward(c);
  CHECK(a.grad()(0, 0) == 3.0);
  CHECK(b.grad()(0, 0) == 2.0);
}

TEST_CASE("relu values and gradients") {
  Tape t;
  Matrix v(1, 2);
  v << -1.0, 2.0;
  Tensor x = t.variable(v);
  Tensor y = ad::relu(x);
  CHECK(y.value()(0, 0) == 0.0);
  CHECK(y.value()(0, 1) == 2.0);
  t.backward(ad::sum(y));
  CHECK(x.grad()(0, 0) == 0.0);
  CHECK(x.grad()(0, 1) == 1.0);
}

TEST_CASE("row_softmax: equal row is uniform; rows sum to 1") {
  Tape t;
  Tensor u = ad::row_softmax(t.constant(Matrix::Constant(1, 4, 3.7)));
  for (Eigen::Index j = 0; j < 4; ++j) CHECK(u.value()(0, j) == 0.25);
  Matrix big = 50.0 * random_matrix(20, 6, 3);
  Tensor s = ad::row_softmax(t.constant(big));
  for (Eigen::Index i = 0; i < 20; ++i) {
    CHECK(std::abs(s.value().row(i).sum() - 1.0) < 1e-12);
    CHECK(s.value().row(i).minCoeff() >= 0.0);
    CHECK(s.value().row(i).maxCoeff() <= 1.0);
  }
  Tensor m = ad::row_softmax(t.constant(random_matrix(5, 3, 8)));
  CHECK(m.value().minCoeff() > 0.0);
  CHECK(m.value().maxCoeff() < 1.0);
}

TEST_CASE("primitives agree with central differences to 1e-6") {
  const Matrix w = random_matrix(4, 3, 11);
  const Matrix col = random_matrix(5, 1, 12);
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {0, 4}, {1, 4}};
  const SparseGraph adj = normalize_adjacency(SparseGraph::from_edges(5, e));
  Matrix away_from_kink = random_matrix(5, 4, 13);
  for (Eigen::Index i = 0; i < away_from_kink.size(); ++i) {
    double& v = away_from_kink.data()[i];
    if (std::abs(v) < 0.1) v += 0.2;
  }

  SUBCASE("matmul") {
    CHECK(primitive_fd_error(
              [&](const Tensor& x) {
                return ad::matmul(x, x.tape()->constant(w));
              },
              random_matrix(5, 4, 1), 5, 3, 1) <= 1e-6);
    CHECK(primitive_fd_error(
              [&](const Tensor& x) {
                return ad::matmul(x.tape()->constant(random_matrix(5, 5, 9)),
                                  x);
              },
              random_matrix(5, 4, 1), 5, 4, 2) <= 1e-6);
  }
  SUBCASE("add") {
    CHECK(primitive_fd_error([](const Tensor& x) { return ad::add(x, x); },
                             random_matrix(5, 4, 2), 5, 4, 3) <= 1e-6);
  }
  SUBCASE("relu") {
    CHECK(primitive_fd_error([](const Tensor& x) { return ad::relu(x); },
                             away_from_kink, 5, 4, 4) <= 1e-6);
  }
  SUBCASE("sigmoid") {
    CHECK(primitive_fd_error([](const Tensor& x) { return ad::sigmoid(x); },
                             random_matrix(5, 4, 5), 5, 4, 5) <= 1e-6);
  }
  SUBCASE("row_softmax") {
    CHECK(primitive_fd_error(
              [](const Tensor& x) { return ad::row_softmax(x); },
              random_matrix(5, 4, 6), 5, 4, 6) <= 1e-6);
  }
  SUBCASE("scale_cols, both operands") {
    CHECK(primitive_fd_error(
              [&](const Tensor& x) {
                return ad::scale_cols(x, x.tape()->constant(col));
              },
              random_matrix(5, 4, 7), 5, 4, 7) <= 1e-6);
    const Matrix a = random_matrix(5, 4, 17);
    CHECK(primitive_fd_error(
              [&](const Tensor& x) {
                return ad::scale_cols(x.tape()->constant(a), x);
              },
              random_matrix(5, 1, 8), 5, 4, 8) <= 1e-6);
  }
  SUBCASE("concat_cols and column") {
    CHECK(primitive_fd_error(
              [](const Tensor& x) {
                const std::vector<Tensor> parts{x, ad::relu(x), x};
                return ad::column(ad::concat_cols(parts), 5);
              },
              random_matrix(5, 4, 9), 5, 1, 9) <= 1e-6);
  }
  SUBCASE("spmm_const") {
    CHECK(primitive_fd_error(
              [&](const Tensor& x) { return ad::spmm_const(adj, x); },
              random_matrix(5, 4, 10), 5, 4, 10) <= 1e-6);
  }
}

TEST_CASE("spmm_const: single node is the identity both ways") {
  const SparseGraph one = normalize_adjacency(SparseGraph::from_edges(1, {}));
  Tape t;
  Tensor h = t.variable(random_matrix(1, 3, 1));
  Tensor y = ad::spmm_const(one, h);
  CHECK(y.value() == h.value());
  t.backward(ad::sum(y));
  CHECK(h.grad() == Matrix::Ones(1, 3));
}

TEST_CASE("spmm_const: 2-node hand gradient") {
  const std::vector<Edge> e{{0, 1}};
  const SparseGraph adj = normalize_adjacency(SparseGraph::from_edges(2, e));
  Tape t;
  Tensor h = t.variable(random_matrix(2, 2, 3));
  Tensor y = ad::spmm_const(adj, h);
  // Upstream [[1,0],[0,0]] picks y(0,0).
  Matrix pick(2, 1);
  pick << 1, 0;
  Tensor loss = ad::matmul(ad::matmul(t.constant(Matrix(pick.transpose())), y),
                           t.constant(pick));
  t.backward(loss);
  Matrix want(2, 2);
  want << 0.5, 0, 0.5, 0;
  CHECK((h.grad() - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("spmm_const backward equals dense A^T g oracle (N <= 20)") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const std::size_t n = 8 + 4 * seed;
    Engine eng(seed);
    std::vector<Edge> e;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (bernoulli(eng, 0.25)) e.emplace_back(u, v);
      }
    }
    const SparseGraph adj = normalize_adjacency(SparseGraph::from_edges(n, e));
    const auto rows = static_cast<Eigen::Index>(n);
    Tape t;
    Tensor h = t.variable(random_matrix(rows, 3, seed));
    const Matrix r = random_matrix(3, 1, seed + 50);
    const Matrix l = random_matrix(1, rows, seed + 60);
    t.backward(ad::matmul(ad::matmul(t.constant(l), ad::spmm_const(adj, h)),
                          t.constant(r)));
    const oracle::Dense g = oracle::Dense(l).transpose() * oracle::Dense(r).transpose();
    const oracle::Dense want =
        oracle::normalized_adjacency(n, e).transpose() * g;
    CHECK((oracle::Dense(h.grad()) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dropout: identities and binomial survival") {
  Engine eng(5);
  Tape t;
  Tensor x = t.variable(Matrix::Ones(100, 100));
  CHECK(ad::dropout(x, 0.0, true, eng).id() == x.id());
  CHECK(ad::dropout(x, 0.0, false, eng).id() == x.id());
  CHECK(ad::dropout(x, 0.5, false, eng).id() == x.id());
  Tensor y = ad::dropout(x, 0.5, true, eng);
  std::size_t kept = 0;
  for (Eigen::Index i = 0; i < y.value().size(); ++i) {
    const double v = y.value().data()[i];
    CHECK((v == 0.0 || v == 2.0));
    kept += v != 0.0;
  }
  CHECK(std::abs(static_cast<double>(kept) - 5000.0) <= 4.0 * 50.0);
  CHECK_THROWS_AS(ad::dropout(x, 1.0, true, eng), ContractViolation);
  // Gradient passes through the same mask.
  t.backward(ad::sum(y));
  CHECK(x.grad() == y.value());
}

TEST_CASE("softmax_cross_entropy: analytic cases and gradient") {
  const std::vector<int> labels{0, 2, 1, 3, 1};
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  {
    Tape t;
    Tensor l = ad::softmax_cross_entropy(t.constant(Matrix::Zero(5, 4)),
                                         labels, all);
    CHECK(std::abs(l.value()(0, 0) - std::log(4.0)) < 1e-12);
  }
  {
    Tape t;
    Matrix logits = Matrix::Zero(1, 3);
    logits(0, 1) = 1000.0;
    const std::vector<int> y{1};
    const std::vector<std::size_t> rows{0};
    Tensor l = ad::softmax_cross_entropy(t.constant(logits), y, rows);
    CHECK(l.value()(0, 0) < 1e-6);
  }
  {
    Parameter p{"logits", random_matrix(5, 4, 21), {}};
    const std::vector<std::size_t> mask{0, 2, 3};
    std::vector<Parameter*> params{&p};
    const GradCheckReport rep = finite_diff_check(
        [&](Tape& t) {
          return ad::softmax_cross_entropy(t.parameter(p), labels, mask);
        },
        params);
    CHECK(rep.max_rel_error <= 1e-6);
    // Unmasked rows get zero gradient.
    Tape t;
    t.backward(ad::softmax_cross_entropy(t.parameter(p), labels, mask));
    CHECK(p.grad.row(1).isZero(0.0));
    CHECK(p.grad.row(4).isZero(0.0));
    // Value agrees with the oracle.
    Tape t2(false);
    CHECK(std::abs(ad::softmax_cross_entropy(t2.parameter(p), labels, mask)
                       .value()(0, 0) -
                   oracle::cross_entropy(oracle::Dense(p.value), labels,
                                         mask)) < 1e-12);
  }
  Tape t;
  const std::vector<std::size_t> empty;
  CHECK_THROWS_AS(
      ad::softmax_cross_entropy(t.constant(Matrix::Zero(5, 4)), labels, empty),
      ContractViolation);
}

TEST_CASE("backward: parameter gradients") {
  Parameter used{"used", random_matrix(3, 2, 1), {}};
  Parameter unused{"unused", random_matrix(2, 2, 2), {}};
  Tape t;
  Tensor u = t.parameter(used);
  t.parameter(unused);
  t.backward(ad::sum(u));
  CHECK(used.grad == Matrix::Ones(3, 2));
  CHECK(unused.grad == Matrix::Zero(2, 2));
}

TEST_CASE("backward is linear in the upstream seed") {
  Parameter w{"w", random_matrix(4, 3, 3), {}};
  const Matrix x = random_matrix(6, 4, 4);
  auto run = [&](double seed) {
    Tape t;
    t.backward(ad::sum(ad::sigmoid(ad::matmul(t.constant(x), t.parameter(w)))),
               seed);
    return w.grad;
  };
  CHECK(run(2.0) == 2.0 * run(1.0));
}

TEST_CASE("backward rejects non-scalar losses") {
  Tape t;
  Tensor x = t.variable(Matrix::Ones(2, 2));
  CHECK_THROWS_AS(t.backward(x), ContractViolation);
}

TEST_CASE("non-finite values are reported") {
  Tape t;
  Matrix v = Matrix::Ones(1, 1);
  v(0, 0) = 1e308;
  Tensor x = t.variable(v);
  CHECK_THROWS_AS(ad::add(x, x), NonFiniteValue);
}

TEST_CASE("replaying a seeded computation is bitwise identical") {
  auto run = [] {
    Parameter w{"w", random_matrix(4, 3, 3), {}};
    Engine eng(77);
    Tape t;
    Tensor h = ad::dropout(ad::matmul(t.constant(random_matrix(6, 4, 4)),
                                      t.parameter(w)),
                           0.3, true, eng);
    Tensor l = ad::sum(ad::row_softmax(h));
    t.backward(ad::add(l, ad::sum(ad::relu(h))));
    return std::pair{h.value(), w.grad};
  };
  CHECK(run() == run());
}

TEST_CASE("composite sum(relu(XW)) matches central differences") {
  Parameter w{"w", random_matrix(4, 3, 31), {}};
  const Matrix x = random_matrix(7, 4, 32);
  std::vector<Parameter*> params{&w};
  const GradCheckReport rep = finite_diff_check(
      [&](Tape& t) {
        return ad::sum(ad::relu(ad::matmul(t.constant(x), t.parameter(w))));
      },
      params);
  CHECK(rep.max_rel_error <= 1e-6);
  CHECK(rep.entries_checked == 12);
}

TEST_CASE("finite_diff_check: quadratic and linear references") {
  Parameter th{"theta", scalar(3.0), {}};
  std::vector<Parameter*> params{&th};
  const GradCheckReport q = finite_diff_check(
      [&](Tape& t) {
        Tensor v = t.parameter(th);
        return ad::matmul(v, v);
      },
      params, 1e-5);
  CHECK(q.max_rel_error <= 1e-8);
  const GradCheckReport lin = finite_diff_check(
      [&](Tape& t) {
        return ad::matmul(t.parameter(th), t.constant(scalar(-4.5)));
      },
      params, 1e-5);
  CHECK(lin.max_rel_error <= 1e-10);
}

TEST_CASE("adam: first step is -lr * g / (|g| + eps)") {
  Parameter p{"p", random_matrix(3, 3, 41), {}};
  const Matrix start = p.value;
  p.grad = random_matrix(3, 3, 42);
  std::vector<Parameter*> params{&p};
  AdamState s;
  adam_step(params, s, 0.01, 0.0);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    const double g = p.grad.data()[i];
    const double want = start.data()[i] - 0.01 * g / (std::abs(g) + 1e-8);
    CHECK(std::abs(p.value.data()[i] - want) < 1e-15);
    CHECK(std::abs(std::abs(p.value.data()[i] - start.data()[i]) - 0.01) <
          1e-8);
  }
}

TEST_CASE("adam: zero gradient and zero decay leave parameters unchanged") {
  Parameter p{"p", random_matrix(2, 3, 43), {}};
  const Matrix start = p.value;
  p.grad = Matrix::Zero(2, 3);
  std::vector<Parameter*> params{&p};
  AdamState s;
  for (int i = 0; i < 5; ++i) adam_step(params, s, 0.1, 0.0);
  CHECK(p.value == start);
}

TEST_CASE("adam: weight decay enters as an L2 gradient") {
  // With g = 0 and decay wd the first step is -lr * sign(p).
  Parameter p{"p", random_matrix(2, 2, 44), {}};
  const Matrix start = p.value;
  p.grad = Matrix::Zero(2, 2);
  std::vector<Parameter*> params{&p};
  AdamState s;
  adam_step(params, s, 0.05, 5e-4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double v = start.data()[i];
    const double g = 5e-4 * v;
    CHECK(std::abs(p.value.data()[i] - (v - 0.05 * g / (std::abs(g) + 1e-8))) <
          1e-15);
  }
}

TEST_CASE("adam: same inputs give bitwise-identical trajectories") {
  auto run = [] {
    Parameter p{"p", random_matrix(3, 2, 45), {}};
    std::vector<Parameter*> params{&p};
    AdamState s;
    const Matrix x = random_matrix(5, 3, 46);
    for (int i = 0; i < 10; ++i) {
      Tape t;
      t.backward(ad::sum(ad::sigmoid(ad::matmul(t.constant(x), t.parameter(p)))));
      adam_step(params, s, 0.1, 5e-4);
    }
    return p.value;
  };
  CHECK(run() == run());
}
