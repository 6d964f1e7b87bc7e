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
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ptsearch/errors.hpp"
#include "ptsearch/graph.hpp"
#include "ptsearch/pipeline.hpp"

using namespace ptsearch;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Engine eng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(eng);
  return m;
}

struct Fixture {
  std::vector<Edge> edges;
  SparseGraph adj;
  oracle::Dense dense_adj;
  Matrix x;
};

Fixture small_graph(std::size_t n, std::size_t d, std::uint64_t seed) {
  Fixture f;
  Engine eng(seed);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (bernoulli(eng, 0.2)) f.edges.emplace_back(u, v);
    }
  }
  f.adj = normalize_adjacency(SparseGraph::from_edges(n, f.edges));
  f.dense_adj = oracle::normalized_adjacency(n, f.edges);
  f.x = random_matrix(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(d), seed + 1000);
  return f;
}

// Random genome starting and ending with T, with the given interior length.
Genome random_tt_genome(Engine& eng, std::size_t interior) {
  std::string s = "T";
  for (std::size_t i = 0; i < interior; ++i) s += bernoulli(eng, 0.5) ? 'P' : 'T';
  return Genome::parse(s + "T");
}

double max_abs_diff(const Matrix& a, const oracle::Dense& b) {
  return (oracle::Dense(a) - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("genome parsing") {
  CHECK(Genome::parse("TPPT").str() == "TPPT");
  CHECK(Genome::parse("tppt").str() == "TPPT");
  CHECK(Genome::parse("[T, P, P, T]").str() == "TPPT");
  CHECK(Genome::parse("T-P T").str() == "TPT");
  const Genome g = Genome::parse("TPTPPT");
  CHECK(g.count(Op::P) == 3);
  CHECK(g.count(Op::T) == 3);
  CHECK(g.p_layers() == std::vector<std::size_t>{1, 3, 4});
  CHECK(g.t_layers() == std::vector<std::size_t>{0, 2, 5});
  CHECK_THROWS_AS(Genome::parse(""), InvalidGenome);
  CHECK_THROWS_AS(Genome::parse("TTP"), InvalidGenome);
  try {
    Genome::parse("TPXT");
    FAIL("expected InvalidGenome");
  } catch (const InvalidGenome& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'X'") != std::string::npos);
    CHECK(msg.find("position 2") != std::string::npos);
  }
}

TEST_CASE("build_model: weight shapes chain d -> h -> c") {
  const ModelDims dims{4, 8, 3};
  const PipelineModel tt = build_model(Genome::parse("TT"), dims, {}, {}, 0);
  REQUIRE(tt.weights.size() == 2);
  CHECK(tt.weights[0].value.rows() == 4);
  CHECK(tt.weights[0].value.cols() == 8);
  CHECK(tt.weights[1].value.rows() == 8);
  CHECK(tt.weights[1].value.cols() == 3);

  const PipelineModel tppt =
      build_model(Genome::parse("TPPT"), dims, {}, {}, 0);
  REQUIRE(tppt.weights.size() == 2);
  CHECK(tppt.weights[0].value.rows() == 4);
  CHECK(tppt.weights[1].value.cols() == 3);
  REQUIRE(tppt.gate.has_value());
  CHECK(tppt.gate->value.rows() == 8);
  CHECK(tppt.gate->value.isZero(0.0));

  const PipelineModel sole =
      build_model(Genome::parse("PPT"), dims, {false, true}, {}, 0);
  REQUIRE(sole.weights.size() == 1);
  CHECK(sole.weights[0].value.rows() == 4);
  CHECK(sole.weights[0].value.cols() == 3);

  PipelineModel ttt = build_model(Genome::parse("TTT"), dims, {}, {}, 0);
  CHECK(ttt.weights[1].value.rows() == 8);
  CHECK(ttt.weights[1].value.cols() == 8);
  CHECK(ttt.parameters().size() == 4);  // three weights plus the gate
}

TEST_CASE("build_model: Glorot bounds and determinism") {
  const ModelDims dims{30, 20, 5};
  const PipelineModel a = build_model(Genome::parse("TPT"), dims, {}, {}, 7);
  const PipelineModel b = build_model(Genome::parse("TPT"), dims, {}, {}, 7);
  const PipelineModel c = build_model(Genome::parse("TPT"), dims, {}, {}, 8);
  CHECK(a.weights[0].value == b.weights[0].value);
  CHECK_FALSE(a.weights[0].value == c.weights[0].value);
  const double limit = std::sqrt(6.0 / 50.0);
  CHECK(a.weights[0].value.cwiseAbs().maxCoeff() <= limit);
  // Uniform on [-l, l] has variance l^2 / 3.
  const double var = a.weights[0].value.squaredNorm() / 600.0;
  CHECK(std::abs(var - limit * limit / 3.0) < 0.2 * limit * limit / 3.0);
}

TEST_CASE("build_model: gating needs a leading T") {
  CHECK_THROWS_AS(build_model(Genome::parse("PT"), {4, 8, 3}, {true, true},
                              {}, 0),
                  InvalidGenome);
  CHECK_NOTHROW(build_model(Genome::parse("PT"), {4, 8, 3}, {false, true}, {},
                            0));
}

TEST_CASE("forward: TPPT without gate or skip is A(A relu(XW1))W2") {
  const Fixture f = small_graph(12, 5, 1);
  PipelineModel m =
      build_model(Genome::parse("TPPT"), {5, 6, 3}, {false, false}, {}, 3);
  Tape t(false);
  const ForwardOutput out = forward(m, t, f.adj, f.x, Mode::kEval, nullptr);
  const oracle::Dense w1 = m.weights[0].value;
  const oracle::Dense w2 = m.weights[1].value;
  const oracle::Dense want =
      f.dense_adj * (f.dense_adj * oracle::relu(oracle::Dense(f.x) * w1)) * w2;
  CHECK(max_abs_diff(out.logits.value(), want) < 1e-12);
  CHECK(out.layer_outputs.size() == 5);
  CHECK(out.gate_weights.empty());
}

TEST_CASE("forward matches the straight-line oracle for all flag settings") {
  Engine eng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 6 + uniform_index(eng, 25);  // N <= 30
    const Fixture f = small_graph(n, 4, 500 + trial);
    const Genome g = random_tt_genome(eng, uniform_index(eng, 7));
    const ModelFlags flags{bernoulli(eng, 0.5), bernoulli(eng, 0.5)};
    PipelineModel m = build_model(g, {4, 5, 3}, flags, {}, trial);
    std::optional<Eigen::VectorXd> gate;
    if (flags.gate) {
      m.gate->value = random_matrix(5, 1, 900 + trial);
      gate = Eigen::VectorXd(m.gate->value.col(0));
    }
    std::vector<oracle::Dense> ws;
    for (const Parameter& w : m.weights) ws.emplace_back(w.value);
    const std::vector<oracle::Dense> want =
        oracle::forward(g.str(), ws, gate, flags.skip, f.dense_adj, f.x);

    Tape t(false);
    const ForwardOutput out = forward(m, t, f.adj, f.x, Mode::kEval, nullptr);
    INFO(g.str(), " gate=", flags.gate, " skip=", flags.skip);
    REQUIRE(out.layer_outputs.size() == want.size());
    for (std::size_t l = 0; l < want.size(); ++l) {
      CHECK(max_abs_diff(out.layer_outputs[l].value(), want[l]) < 1e-12);
    }
  }
}

TEST_CASE("gate weights are positive and sum to 1 per node") {
  const Fixture f = small_graph(25, 4, 7);
  PipelineModel m =
      build_model(Genome::parse("TPPTPPPTPT"), {4, 6, 3}, {}, {}, 1);
  m.gate->value = 3.0 * random_matrix(6, 1, 2);
  Tape t(false);
  const ForwardOutput out = forward(m, t, f.adj, f.x, Mode::kEval, nullptr);
  // One aggregation before each T that follows a P; #P grows 2, 5, 6.
  REQUIRE(out.gate_weights.size() == 3);
  CHECK(out.gate_weights[0].cols() == 2);
  CHECK(out.gate_weights[1].cols() == 5);
  CHECK(out.gate_weights[2].cols() == 6);
  for (const Matrix& w : out.gate_weights) {
    CHECK(w.minCoeff() > 0.0);
    CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("single-P gating is bitwise identical to gate-off") {
  const Fixture f = small_graph(20, 6, 9);
  for (const char* text : {"TPT", "TPTT", "TTPT"}) {
    PipelineModel on = build_model(Genome::parse(text), {6, 5, 3},
                                   {true, true}, {0.3, 0.4}, 4);
    PipelineModel off = build_model(Genome::parse(text), {6, 5, 3},
                                    {false, true}, {0.3, 0.4}, 4);
    on.gate->value = random_matrix(5, 1, 5);
    for (Mode mode : {Mode::kEval, Mode::kTrain}) {
      Engine r1(11);
      Engine r2(11);
      Tape t1;
      Tape t2;
      const Matrix a =
          forward(on, t1, f.adj, f.x, mode, &r1).logits.value();
      const Matrix b =
          forward(off, t2, f.adj, f.x, mode, &r2).logits.value();
      CHECK(a == b);
    }
  }
}

TEST_CASE("gating two identical P outputs returns that output") {
  // With no edges A = I, so both propagations reproduce o^(1).
  Fixture f;
  f.adj = normalize_adjacency(SparseGraph::from_edges(8, {}));
  f.x = random_matrix(8, 3, 1);
  PipelineModel m =
      build_model(Genome::parse("TPPT"), {3, 4, 2}, {true, false}, {}, 2);
  m.gate->value = random_matrix(4, 1, 3);
  Tape t(false);
  const ForwardOutput out = forward(m, t, f.adj, f.x, Mode::kEval, nullptr);
  CHECK((out.layer_outputs[3].value() - out.layer_outputs[1].value())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("eval forward is deterministic; training needs an rng") {
  const Fixture f = small_graph(15, 4, 3);
  PipelineModel m =
      build_model(Genome::parse("TPTPT"), {4, 6, 3}, {}, {0.5, 0.5}, 0);
  Tape t1(false);
  Tape t2(false);
  CHECK(forward(m, t1, f.adj, f.x, Mode::kEval, nullptr).logits.value() ==
        forward(m, t2, f.adj, f.x, Mode::kEval, nullptr).logits.value());
  Tape t3;
  CHECK_THROWS_AS(forward(m, t3, f.adj, f.x, Mode::kTrain, nullptr),
                  ContractViolation);
  CHECK_THROWS_AS(
      forward(m, t3, f.adj, Matrix::Zero(15, 5), Mode::kEval, nullptr),
      ContractViolation);
}

TEST_CASE("pipeline loss gradient matches finite differences") {
  const Fixture f = small_graph(15, 4, 21);
  std::vector<int> labels(15);
  for (int i = 0; i < 15; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  const std::vector<std::size_t> train{0, 1, 2, 3, 4, 5, 6, 7};
  PipelineModel m =
      build_model(Genome::parse("TPTPPT"), {4, 6, 3}, {true, true}, {}, 5);
  m.gate->value = 0.5 * random_matrix(6, 1, 6);
  const GradCheckReport rep = finite_diff_check(
      [&](Tape& t) {
        const ForwardOutput out =
            forward(m, t, f.adj, f.x, Mode::kEval, nullptr);
        return ad::softmax_cross_entropy(out.logits, labels, train);
      },
      m.parameters());
  CHECK(rep.max_rel_error <= 1e-4);
}

TEST_CASE("smoothness: definitional cases") {
  Matrix same(5, 3);
  for (int i = 0; i < 5; ++i) same.row(i) << 0.3, -1.2, 2.0;
  CHECK(graph_smoothness(same) == 1.0);
  CHECK(node_smoothness(same) == Vector::Ones(5));

  Matrix orth(2, 2);
  orth << 1, 0, 0, 1;
  const Vector s = node_smoothness(orth);
  CHECK(std::abs(s(0) - (1.0 - std::sqrt(2.0) / 2.0)) < 1e-12);
  CHECK(std::abs(s(1) - (1.0 - std::sqrt(2.0) / 2.0)) < 1e-12);
  CHECK(std::abs(graph_smoothness(orth) - 0.29289321881345254) < 1e-12);

  Matrix anti(2, 2);
  anti << 1, 0, -1, 0;
  CHECK(graph_smoothness(anti) == 0.0);

  CHECK_THROWS_AS(graph_smoothness(Matrix::Ones(1, 3)), ContractViolation);
}

TEST_CASE("smoothness: oracle agreement, range and scale invariance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix e = random_matrix(12, 4, seed);
    if (seed % 3 == 0) e.row(2).setZero();
    const double s = graph_smoothness(e);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(std::abs(s - oracle::smoothness(e)) < 1e-12);
    Matrix scaled = e;
    Engine eng(seed);
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
      scaled.row(i) *= 0.01 + 100.0 * uniform01(eng);
    }
    CHECK(std::abs(graph_smoothness(scaled) - s) < 1e-12);
  }
}

TEST_CASE("smoothness trace: one value per layer plus the input") {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 50;
  p.p_intra = 0.2;
  p.p_inter = 0.02;
  p.feature_dim = 8;
  p.seed = 4;
  const DatasetBundle b = gen_sbm(p);
  const SparseGraph adj = normalize_adjacency(b.graph);

  PipelineModel short_model =
      build_model(Genome::parse("TPPT"), {8, 6, 2}, {false, false}, {}, 0);
  const SmoothnessTrace tr = smoothness_trace(short_model, adj, b.features);
  CHECK(tr.values.size() == 5);
  CHECK(tr.ops.size() == 4);

  // Forty propagations on a connected graph converge towards the dominant
  // eigenvector.
  PipelineModel deep = build_model(Genome::parse(std::string(40, 'P') + "T"),
                                   {8, 6, 2}, {false, false}, {}, 0);
  const SmoothnessTrace d = smoothness_trace(deep, adj, b.features);
  REQUIRE(d.values.size() == 42);
  CHECK(d.values[40] >= 0.99);
  CHECK(d.values[40] > d.values[0]);
  for (std::size_t l = 1; l <= 40; ++l) CHECK(d.ops[l - 1] == Op::P);
}
