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

#ifndef PTSEARCH_GRAPH_HPP_
#define PTSEARCH_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptsearch/matrix.hpp"

namespace ptsearch {

using Edge = std::pair<std::size_t, std::size_t>;

// Symmetric adjacency in CSR form. Column indices are sorted within a row.
//
// An unnormalized graph stores every undirected edge in both directions with
// value 1 and no self-loops. normalize_adjacency() produces the propagation
// matrix D^{-1/2}(A+I)D^{-1/2}.
struct SparseGraph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
  bool normalized = false;
  bool has_self_loops = false;

  // Builds an unnormalized graph from undirected edges (any orientation).
  // Throws ContractViolation on self-loops, duplicates or out-of-range ends.
  static SparseGraph from_edges(std::size_t num_nodes,
                                std::span<const Edge> edges);

  std::size_t num_entries() const { return col_indices.size(); }
  // Undirected edges excluding self-loops, as (u, v) with u < v, sorted.
  std::vector<Edge> undirected_edges() const;
  std::size_t num_undirected_edges() const;

  // Checks every structural invariant; throws ContractViolation.
  void validate() const;

  bool operator==(const SparseGraph&) const = default;
};

SparseGraph normalize_adjacency(const SparseGraph& g);

// a * h for a normalized (or any) CSR matrix.
Matrix spmm(const SparseGraph& a, const Matrix& h);
// a^T * h, computed by scattering rows; equals spmm for symmetric values.
Matrix spmm_transposed(const SparseGraph& a, const Matrix& h);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  bool operator==(const Splits&) const = default;
};

struct DatasetMeta {
  std::string name;
  std::size_t num_nodes = 0;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;

  bool operator==(const DatasetMeta&) const = default;
};

struct DatasetBundle {
  SparseGraph graph;
  Matrix features;
  std::vector<int> labels;
  Splits splits;
  DatasetMeta meta;

  // Throws LoadError describing the first violated invariant.
  void validate() const;

  bool operator==(const DatasetBundle& o) const {
    return graph == o.graph && features == o.features && labels == o.labels &&
           splits == o.splits && meta == o.meta;
  }
};

// Reads the native directory format: meta.json, graph.edges, features.csv,
// labels.csv and a split file (splits.json by default).
DatasetBundle load_dataset(const std::filesystem::path& dir,
                           std::string_view splits_file = "splits.json");
void save_dataset(const DatasetBundle& bundle,
                  const std::filesystem::path& dir);

struct SbmParams {
  std::size_t blocks = 2;
  std::size_t nodes_per_block = 50;
  double p_intra = 0.1;
  double p_inter = 0.01;
  std::size_t feature_dim = 16;
  std::uint64_t seed = 0;
};

// Stochastic block model with Gaussian block-mean features (scaled by
// 1/sqrt(feature_dim)) and a stratified
// 60/20/20 split per block. Draws from the `sbm` substream of `seed`.
DatasetBundle gen_sbm(const SbmParams& params);

// Removes each undirected edge independently with probability `fraction`.
DatasetBundle drop_edges(const DatasetBundle& bundle, double fraction,
                         std::uint64_t seed);

}  // namespace ptsearch

#endif  // PTSEARCH_GRAPH_HPP_
