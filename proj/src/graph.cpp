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

#include "ptsearch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptsearch/errors.hpp"
#include "ptsearch/rng.hpp"

namespace ptsearch {

SparseGraph SparseGraph::from_edges(std::size_t num_nodes,
                                    std::span<const Edge> edges) {
  std::vector<std::vector<std::size_t>> adj(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw ContractViolation("edge (" + std::to_string(u) + ", " +
                              std::to_string(v) + ") out of range for " +
                              std::to_string(num_nodes) + " nodes");
    }
    if (u == v) {
      throw ContractViolation("self-loop on node " + std::to_string(u));
    }
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  SparseGraph g;
  g.num_nodes = num_nodes;
  g.row_offsets.assign(num_nodes + 1, 0);
  for (std::size_t r = 0; r < num_nodes; ++r) {
    auto& row = adj[r];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw ContractViolation("duplicate edge at node " + std::to_string(r));
    }
    g.col_indices.insert(g.col_indices.end(), row.begin(), row.end());
    g.row_offsets[r + 1] = g.col_indices.size();
  }
  g.values.assign(g.col_indices.size(), 1.0);
  return g;
}

std::vector<Edge> SparseGraph::undirected_edges() const {
  std::vector<Edge> out;
  for (std::size_t r = 0; r < num_nodes; ++r) {
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] > r) out.emplace_back(r, col_indices[k]);
    }
  }
  return out;
}

std::size_t SparseGraph::num_undirected_edges() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < num_nodes; ++r) {
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] > r) ++n;
    }
  }
  return n;
}

namespace {

// Position of (r, c) in the CSR arrays, or npos.
std::size_t find_entry(const SparseGraph& g, std::size_t r, std::size_t c) {
  const auto first = g.col_indices.begin() + g.row_offsets[r];
  const auto last = g.col_indices.begin() + g.row_offsets[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - g.col_indices.begin());
}

}  // namespace

void SparseGraph::validate() const {
  auto fail = [](const std::string& msg) {
    throw ContractViolation("invalid sparse graph: " + msg);
  };
  if (row_offsets.size() != num_nodes + 1) fail("row_offsets length");
  if (row_offsets.front() != 0) fail("row_offsets[0] != 0");
  if (row_offsets.back() != col_indices.size()) fail("row_offsets tail");
  if (values.size() != col_indices.size()) fail("values length");
  for (std::size_t r = 0; r < num_nodes; ++r) {
    if (row_offsets[r] > row_offsets[r + 1]) fail("row_offsets decreasing");
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      const std::size_t c = col_indices[k];
      if (c >= num_nodes) fail("column index out of range");
      if (k > row_offsets[r] && col_indices[k - 1] >= c) {
        fail("row " + std::to_string(r) + " unsorted or duplicated");
      }
      if (c == r && !has_self_loops) fail("unexpected self-loop");
      if (!std::isfinite(values[k]) || values[k] <= 0.0) {
        fail("non-positive or non-finite value");
      }
      if (find_entry(*this, c, r) == static_cast<std::size_t>(-1)) {
        fail("asymmetric structure at (" + std::to_string(r) + ", " +
             std::to_string(c) + ")");
      }
    }
  }
}

SparseGraph normalize_adjacency(const SparseGraph& g) {
  if (g.normalized) {
    throw ContractViolation("normalize_adjacency: graph already normalized");
  }
  SparseGraph out;
  out.num_nodes = g.num_nodes;
  out.row_offsets.assign(g.num_nodes + 1, 0);
  out.col_indices.reserve(g.num_entries() + g.num_nodes);

  // Insert the self-loop at its sorted position in each row.
  for (std::size_t r = 0; r < g.num_nodes; ++r) {
    bool placed = false;
    for (std::size_t k = g.row_offsets[r]; k < g.row_offsets[r + 1]; ++k) {
      const std::size_t c = g.col_indices[k];
      if (c == r) continue;
      if (!placed && c > r) {
        out.col_indices.push_back(r);
        placed = true;
      }
      out.col_indices.push_back(c);
    }
    if (!placed) out.col_indices.push_back(r);
    out.row_offsets[r + 1] = out.col_indices.size();
  }

  std::vector<double> deg(g.num_nodes);
  for (std::size_t r = 0; r < g.num_nodes; ++r) {
    deg[r] = static_cast<double>(out.row_offsets[r + 1] - out.row_offsets[r]);
  }
  out.values.resize(out.col_indices.size());
  for (std::size_t r = 0; r < g.num_nodes; ++r) {
    for (std::size_t k = out.row_offsets[r]; k < out.row_offsets[r + 1]; ++k) {
      // One rounding of 1/sqrt(d_r d_c): symmetric by commutativity, and
      // exactly 1/d on regular graphs.
      out.values[k] = 1.0 / std::sqrt(deg[r] * deg[out.col_indices[k]]);
    }
  }
  out.normalized = true;
  out.has_self_loops = true;
  return out;
}

Matrix spmm(const SparseGraph& a, const Matrix& h) {
  if (static_cast<std::size_t>(h.rows()) != a.num_nodes) {
    throw ContractViolation("spmm: graph has " + std::to_string(a.num_nodes) +
                            " nodes but dense operand has " +
                            std::to_string(h.rows()) + " rows");
  }
  Matrix out = Matrix::Zero(h.rows(), h.cols());
  for (std::size_t r = 0; r < a.num_nodes; ++r) {
    auto row = out.row(static_cast<Eigen::Index>(r));
    for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      row.noalias() +=
          a.values[k] * h.row(static_cast<Eigen::Index>(a.col_indices[k]));
    }
  }
  return out;
}

Matrix spmm_transposed(const SparseGraph& a, const Matrix& h) {
  if (static_cast<std::size_t>(h.rows()) != a.num_nodes) {
    throw ContractViolation("spmm_transposed: dimension mismatch");
  }
  Matrix out = Matrix::Zero(h.rows(), h.cols());
  for (std::size_t r = 0; r < a.num_nodes; ++r) {
    const auto src = h.row(static_cast<Eigen::Index>(r));
    for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
      out.row(static_cast<Eigen::Index>(a.col_indices[k])).noalias() +=
          a.values[k] * src;
    }
  }
  return out;
}

DatasetBundle gen_sbm(const SbmParams& p) {
  if (p.blocks < 2) throw ContractViolation("gen_sbm: blocks must be >= 2");
  if (p.nodes_per_block < 1 || p.feature_dim < 1) {
    throw ContractViolation("gen_sbm: nodes_per_block and feature_dim >= 1");
  }
  if (p.p_intra < 0.0 || p.p_intra > 1.0 || p.p_inter < 0.0 ||
      p.p_inter > 1.0) {
    throw ContractViolation("gen_sbm: probabilities must lie in [0, 1]");
  }
  Engine eng = Rng(p.seed).stream("sbm");
  const std::size_t n = p.blocks * p.nodes_per_block;

  DatasetBundle b;
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.labels[i] = static_cast<int>(i / p.nodes_per_block);
  }

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double prob = b.labels[u] == b.labels[v] ? p.p_intra : p.p_inter;
      if (bernoulli(eng, prob)) edges.emplace_back(u, v);
    }
  }
  b.graph = SparseGraph::from_edges(n, edges);

  const auto d = static_cast<Eigen::Index>(p.feature_dim);
  Matrix means(static_cast<Eigen::Index>(p.blocks), d);
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    means.data()[i] = standard_normal(eng);
  }
  // Scaled so rows have norm around sqrt(2) whatever the width, which keeps
  // freshly initialized logits small.
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.feature_dim));
  b.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      b.features(static_cast<Eigen::Index>(i), j) =
          scale * (means(b.labels[i], j) + standard_normal(eng));
    }
  }

  for (std::size_t blk = 0; blk < p.blocks; ++blk) {
    std::vector<std::size_t> ids(p.nodes_per_block);
    for (std::size_t i = 0; i < p.nodes_per_block; ++i) {
      ids[i] = blk * p.nodes_per_block + i;
    }
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[uniform_index(eng, i)]);
    }
    const std::size_t n_train = ids.size() * 6 / 10;
    const std::size_t n_val = ids.size() * 2 / 10;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto& dst = i < n_train           ? b.splits.train
                  : i < n_train + n_val ? b.splits.val
                                        : b.splits.test;
      dst.push_back(ids[i]);
    }
  }
  std::sort(b.splits.train.begin(), b.splits.train.end());
  std::sort(b.splits.val.begin(), b.splits.val.end());
  std::sort(b.splits.test.begin(), b.splits.test.end());

  b.meta = {"sbm", n, p.feature_dim, p.blocks};
  return b;
}

DatasetBundle drop_edges(const DatasetBundle& bundle, double fraction,
                         std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw ContractViolation("drop_edges: fraction must lie in [0, 1]");
  }
  if (bundle.graph.normalized) {
    throw ContractViolation("drop_edges: expects an unnormalized graph");
  }
  Engine eng = Rng(seed).stream("edges");
  std::vector<Edge> kept;
  for (const Edge& e : bundle.graph.undirected_edges()) {
    if (!bernoulli(eng, fraction)) kept.push_back(e);
  }
  DatasetBundle out = bundle;
  out.graph = SparseGraph::from_edges(bundle.graph.num_nodes, kept);
  return out;
}

}  // namespace ptsearch
