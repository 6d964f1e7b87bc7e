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
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "json.hpp"
#include "ptsearch/errors.hpp"
#include "ptsearch/graph.hpp"

namespace ptsearch {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return in;
}

json read_json(const fs::path& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

template <typename T>
T parse_number(std::string_view tok, const fs::path& path, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) {
    tok.remove_prefix(1);
  }
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' ||
                          tok.back() == '\r')) {
    tok.remove_suffix(1);
  }
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(),
                                         value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw LoadError(path.string() + " line " + std::to_string(line) +
                    ": cannot parse '" + std::string(tok) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::size_t> read_index_list(const json& j, const char* key,
                                         const fs::path& path) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw LoadError(path.string() + ": missing array '" + key + "'");
  }
  std::vector<std::size_t> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw LoadError(path.string() + ": '" + key +
                      "' holds a non-index value " + v.dump());
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

void DatasetBundle::validate() const {
  const std::size_t n = meta.num_nodes;
  if (graph.num_nodes != n) {
    throw LoadError("graph has " + std::to_string(graph.num_nodes) +
                    " nodes, meta says " + std::to_string(n));
  }
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw LoadError("features have " + std::to_string(features.rows()) +
                    " rows, expected " + std::to_string(n));
  }
  if (static_cast<std::size_t>(features.cols()) != meta.num_features) {
    throw LoadError("features have " + std::to_string(features.cols()) +
                    " columns, expected " +
                    std::to_string(meta.num_features));
  }
  if (labels.size() != n) {
    throw LoadError("labels have " + std::to_string(labels.size()) +
                    " rows, expected " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 ||
        static_cast<std::size_t>(labels[i]) >= meta.num_classes) {
      throw LoadError("label " + std::to_string(labels[i]) + " at row " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(meta.num_classes) + ")");
    }
  }
  std::vector<char> owner(n, 0);
  const std::pair<const char*, const std::vector<std::size_t>*> lists[] = {
      {"train", &splits.train}, {"val", &splits.val}, {"test", &splits.test}};
  char tag = 1;
  for (const auto& [name, ids] : lists) {
    for (std::size_t id : *ids) {
      if (id >= n) {
        throw LoadError(std::string(name) + " split index " +
                        std::to_string(id) + " out of range");
      }
      if (owner[id] != 0) {
        throw LoadError(std::string(name) + " split index " +
                        std::to_string(id) + " appears in more than one split");
      }
      owner[id] = tag;
    }
    ++tag;
  }
  try {
    graph.validate();
  } catch (const ContractViolation& e) {
    throw LoadError(e.what());
  }
}

DatasetBundle load_dataset(const fs::path& dir, std::string_view splits_file) {
  DatasetBundle b;

  const fs::path meta_path = dir / "meta.json";
  const json meta = read_json(meta_path);
  try {
    b.meta.name = meta.at("name").get<std::string>();
    b.meta.num_nodes = meta.at("num_nodes").get<std::size_t>();
    b.meta.num_features = meta.at("num_features").get<std::size_t>();
    b.meta.num_classes = meta.at("num_classes").get<std::size_t>();
  } catch (const json::exception& e) {
    throw LoadError(meta_path.string() + ": " + e.what());
  }
  const std::size_t n = b.meta.num_nodes;
  const std::size_t d = b.meta.num_features;

  const fs::path edge_path = dir / "graph.edges";
  {
    std::ifstream in = open_input(edge_path);
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::size_t sep = line.find_first_of(" \t");
      if (sep == std::string::npos) {
        throw LoadError(edge_path.string() + " line " +
                        std::to_string(lineno) + ": expected 'u v'");
      }
      const auto u = parse_number<std::size_t>(
          std::string_view(line).substr(0, sep), edge_path, lineno);
      const auto v = parse_number<std::size_t>(
          std::string_view(line).substr(sep + 1), edge_path, lineno);
      edges.emplace_back(u, v);
    }
    try {
      b.graph = SparseGraph::from_edges(n, edges);
    } catch (const ContractViolation& e) {
      throw LoadError(edge_path.string() + ": " + e.what());
    }
  }

  const fs::path feat_path = dir / "features.csv";
  {
    std::ifstream in = open_input(feat_path);
    b.features.resize(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(d));
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      if (row >= n) {
        throw LoadError(feat_path.string() + ": more than " +
                        std::to_string(n) + " rows");
      }
      std::size_t col = 0;
      std::size_t start = 0;
      while (start <= line.size()) {
        std::size_t end = line.find(',', start);
        if (end == std::string::npos) end = line.size();
        if (col >= d) {
          throw LoadError(feat_path.string() + " line " +
                          std::to_string(row + 1) + ": more than " +
                          std::to_string(d) + " columns");
        }
        b.features(static_cast<Eigen::Index>(row),
                   static_cast<Eigen::Index>(col)) =
            parse_number<double>(
                std::string_view(line).substr(start, end - start), feat_path,
                row + 1);
        ++col;
        start = end + 1;
      }
      if (col != d) {
        throw LoadError(feat_path.string() + " line " +
                        std::to_string(row + 1) + ": " + std::to_string(col) +
                        " columns, expected " + std::to_string(d));
      }
      ++row;
    }
    if (row != n) {
      throw LoadError(feat_path.string() + ": " + std::to_string(row) +
                      " rows, expected " + std::to_string(n));
    }
  }

  const fs::path label_path = dir / "labels.csv";
  {
    std::ifstream in = open_input(label_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      const int y = parse_number<int>(line, label_path, lineno);
      if (y < 0 || static_cast<std::size_t>(y) >= b.meta.num_classes) {
        throw LoadError(label_path.string() + " row " +
                        std::to_string(b.labels.size()) + ": label " +
                        std::to_string(y) + " outside [0, " +
                        std::to_string(b.meta.num_classes) + ")");
      }
      b.labels.push_back(y);
    }
  }

  const fs::path split_path = dir / std::string(splits_file);
  const json splits = read_json(split_path);
  b.splits.train = read_index_list(splits, "train", split_path);
  b.splits.val = read_index_list(splits, "val", split_path);
  b.splits.test = read_index_list(splits, "test", split_path);

  b.validate();
  return b;
}

void save_dataset(const DatasetBundle& b, const fs::path& dir) {
  b.validate();
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };

  {
    json meta = {{"name", b.meta.name},
                 {"num_nodes", b.meta.num_nodes},
                 {"num_features", b.meta.num_features},
                 {"num_classes", b.meta.num_classes}};
    open("meta.json") << meta.dump() << '\n';
  }
  {
    std::ofstream out = open("graph.edges");
    for (const auto& [u, v] : b.graph.undirected_edges()) {
      out << u << ' ' << v << '\n';
    }
  }
  {
    std::ofstream out = open("features.csv");
    std::string line;
    for (Eigen::Index r = 0; r < b.features.rows(); ++r) {
      line.clear();
      for (Eigen::Index c = 0; c < b.features.cols(); ++c) {
        if (c > 0) line += ',';
        line += format_double(b.features(r, c));
      }
      out << line << '\n';
    }
  }
  {
    std::ofstream out = open("labels.csv");
    for (int y : b.labels) out << y << '\n';
  }
  {
    json splits = {{"train", b.splits.train},
                   {"val", b.splits.val},
                   {"test", b.splits.test}};
    open("splits.json") << splits.dump() << '\n';
  }
}

}  // namespace ptsearch
