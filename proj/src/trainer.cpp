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

#include "ptsearch/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ptsearch/autodiff.hpp"
#include "ptsearch/errors.hpp"

namespace ptsearch {

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractViolation("train: epochs must be >= 1");
  if (hidden < 1) throw ContractViolation("train: hidden must be >= 1");
  if (input_dropout < 0.0 || input_dropout >= 1.0 || layer_dropout < 0.0 ||
      layer_dropout >= 1.0) {
    throw ContractViolation("train: dropout rates must lie in [0, 1)");
  }
  if (lr < 0.0 || weight_decay < 0.0) {
    throw ContractViolation("train: lr and weight_decay must be >= 0");
  }
}

TrainConfig TrainConfig::preset(std::string_view dataset) {
  TrainConfig c;
  if (dataset == "cora") {
    c.lr = 0.02;
    c.hidden = 128;
    c.input_dropout = 0.5;
    c.layer_dropout = 0.8;
  } else if (dataset == "citeseer") {
    c.lr = 0.03;
    c.hidden = 256;
    c.input_dropout = 0.5;
    c.layer_dropout = 0.8;
  } else if (dataset == "pubmed") {
    c.lr = 0.1;
    c.hidden = 512;
    c.input_dropout = 0.3;
    c.layer_dropout = 0.5;
  } else if (dataset == "ogbn-arxiv") {
    c.lr = 0.001;
    c.hidden = 128;
    c.epochs = 500;
    c.input_dropout = 0.3;
    c.layer_dropout = 0.5;
  }
  return c;
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["epochs"] = epochs;
  j["hidden"] = hidden;
  j["input_dropout"] = input_dropout;
  j["layer_dropout"] = layer_dropout;
  j["gate_enabled"] = gate;
  j["skip_enabled"] = skip;
  j["eval_repeats"] = eval_repeats;
  return j;
}

nlohmann::ordered_json EvalResult::to_json() const {
  nlohmann::ordered_json j;
  j["best_val_acc"] = best_val_acc;
  j["test_acc_at_best_val"] = test_acc_at_best_val;
  j["best_epoch"] = best_epoch;
  j["final_train_loss"] = final_train_loss;
  nlohmann::ordered_json c = nlohmann::ordered_json::array();
  for (const EpochStats& e : curve) {
    c.push_back({{"train_loss", e.train_loss}, {"val_acc", e.val_acc}});
  }
  j["curve"] = std::move(c);
  j["wall_time"] = wall_time;
  j["final_smoothness"] = final_smoothness;
  return j;
}

Matrix predict(PipelineModel& model, const SparseGraph& adj,
               const Matrix& features) {
  Tape tape(false);
  return forward(model, tape, adj, features, Mode::kEval, nullptr)
      .logits.value();
}

double accuracy(const Matrix& logits, std::span<const int> labels,
                std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : rows) {
    Eigen::Index arg = 0;
    logits.row(static_cast<Eigen::Index>(r)).maxCoeff(&arg);
    hits += (arg == labels[r]);
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

TrainedModel train_model(const Genome& genome, const DatasetBundle& bundle,
                         const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (bundle.splits.train.empty() || bundle.splits.val.empty()) {
    throw ContractViolation("train: train and val splits must be non-empty");
  }
  const auto start = std::chrono::steady_clock::now();
  const SparseGraph adj = normalize_adjacency(bundle.graph);
  const ModelDims dims{bundle.meta.num_features, config.hidden,
                       bundle.meta.num_classes};
  PipelineModel model =
      build_model(genome, dims, {config.gate, config.skip},
                  {config.input_dropout, config.layer_dropout}, seed);
  const std::vector<Parameter*> params = model.parameters();
  AdamState adam;
  Engine dropout_rng = Rng(seed).stream("dropout");

  TrainedModel out{{}, model};
  EvalResult& res = out.result;
  res.curve.reserve(config.epochs);
  double best_val = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double loss_value = 0.0;
    try {
      Tape tape;
      const ForwardOutput fo = forward(model, tape, adj, bundle.features,
                                       Mode::kTrain, &dropout_rng);
      const Tensor loss = ad::softmax_cross_entropy(
          fo.logits, bundle.labels, bundle.splits.train);
      loss_value = loss.value()(0, 0);
      tape.backward(loss);
    } catch (const NonFiniteValue& e) {
      throw TrainingDiverged(epoch, e.what());
    }
    if (!std::isfinite(loss_value)) {
      throw TrainingDiverged(epoch, "non-finite training loss");
    }
    adam_step(params, adam, config.lr, config.weight_decay);

    Matrix logits;
    try {
      logits = predict(model, adj, bundle.features);
    } catch (const NonFiniteValue& e) {
      throw TrainingDiverged(epoch, e.what());
    }
    const double val = accuracy(logits, bundle.labels, bundle.splits.val);
    res.curve.push_back({loss_value, val});
    if (val > best_val) {
      best_val = val;
      res.best_val_acc = val;
      res.best_epoch = epoch;
      res.test_acc_at_best_val =
          accuracy(logits, bundle.labels, bundle.splits.test);
      out.best_model = model;
    }
  }
  res.final_train_loss = res.curve.back().train_loss;
  if (bundle.meta.num_nodes >= 2) {
    res.final_smoothness =
        graph_smoothness(predict(out.best_model, adj, bundle.features));
  }
  res.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

EvalResult train_eval(const Genome& genome, const DatasetBundle& bundle,
                      const TrainConfig& config, std::uint64_t seed) {
  return train_model(genome, bundle, config, seed).result;
}

std::pair<double, double> mean_and_std(std::vector<double> values) {
  if (values.empty()) return {0.0, 0.0};
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

RepeatSummary repeat_eval(const Genome& genome, const DatasetBundle& bundle,
                          const TrainConfig& config,
                          std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) {
    throw ContractViolation("repeat_eval: needs at least two seeds");
  }
  RepeatSummary s;
  s.seeds.assign(seeds.begin(), seeds.end());
  std::vector<double> tests;
  std::vector<double> vals;
  for (std::uint64_t seed : seeds) {
    s.runs.push_back(train_eval(genome, bundle, config, seed));
    tests.push_back(s.runs.back().test_acc_at_best_val);
    vals.push_back(s.runs.back().best_val_acc);
  }
  std::tie(s.mean_test_acc, s.std_test_acc) = mean_and_std(tests);
  s.mean_val_acc = mean_and_std(vals).first;
  return s;
}

nlohmann::ordered_json RepeatSummary::to_json() const {
  nlohmann::ordered_json j;
  j["seeds"] = seeds;
  j["mean_test_acc"] = mean_test_acc;
  j["std_test_acc"] = std_test_acc;
  j["mean_val_acc"] = mean_val_acc;
  nlohmann::ordered_json r = nlohmann::ordered_json::array();
  for (const EvalResult& e : runs) r.push_back(e.to_json());
  j["runs"] = std::move(r);
  return j;
}

}  // namespace ptsearch
