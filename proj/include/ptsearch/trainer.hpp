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

#ifndef PTSEARCH_TRAINER_HPP_
#define PTSEARCH_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ptsearch/graph.hpp"
#include "ptsearch/pipeline.hpp"

namespace ptsearch {

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t hidden = 64;
  double input_dropout = 0.5;
  double layer_dropout = 0.5;
  bool gate = true;
  bool skip = true;
  std::size_t eval_repeats = 1;

  void validate() const;

  // Per-dataset defaults: "cora", "citeseer", "pubmed", "ogbn-arxiv".
  // Any other name gets the generic defaults above.
  static TrainConfig preset(std::string_view dataset);

  nlohmann::ordered_json to_json() const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_acc = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct EvalResult {
  double best_val_acc = 0.0;
  double test_acc_at_best_val = 0.0;
  std::size_t best_epoch = 0;  // 1-based
  double final_train_loss = 0.0;
  std::vector<EpochStats> curve;
  double wall_time = 0.0;  // seconds
  // Graph smoothness of the logits of the best-validation model.
  double final_smoothness = 0.0;

  // Everything except wall_time.
  bool same_outcome(const EvalResult& o) const {
    return best_val_acc == o.best_val_acc &&
           test_acc_at_best_val == o.test_acc_at_best_val &&
           best_epoch == o.best_epoch &&
           final_train_loss == o.final_train_loss && curve == o.curve &&
           final_smoothness == o.final_smoothness;
  }

  nlohmann::ordered_json to_json() const;
};

struct TrainedModel {
  EvalResult result;
  // Parameters as of the best-validation epoch.
  PipelineModel best_model;
};

// Full-batch Adam training on the train split; validation accuracy after
// every epoch; test accuracy read at the best-validation epoch (first one on
// ties). Throws TrainingDiverged on a non-finite loss.
TrainedModel train_model(const Genome& genome, const DatasetBundle& bundle,
                         const TrainConfig& config, std::uint64_t seed);

EvalResult train_eval(const Genome& genome, const DatasetBundle& bundle,
                      const TrainConfig& config, std::uint64_t seed);

// Evaluation-mode logits.
Matrix predict(PipelineModel& model, const SparseGraph& normalized_adj,
               const Matrix& features);

// Fraction of `rows` whose argmax (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, std::span<const int> labels,
                std::span<const std::size_t> rows);

struct RepeatSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<EvalResult> runs;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;  // sample standard deviation
  double mean_val_acc = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Trains once per seed. Needs at least two seeds.
RepeatSummary repeat_eval(const Genome& genome, const DatasetBundle& bundle,
                          const TrainConfig& config,
                          std::span<const std::uint64_t> seeds);

// Sample mean and standard deviation, independent of the order of `values`.
std::pair<double, double> mean_and_std(std::vector<double> values);

}  // namespace ptsearch

#endif  // PTSEARCH_TRAINER_HPP_
