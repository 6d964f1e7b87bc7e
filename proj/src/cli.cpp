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

#include "ptsearch/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptsearch/errors.hpp"
#include "ptsearch/evolve.hpp"
#include "ptsearch/graph.hpp"
#include "ptsearch/pipeline.hpp"
#include "ptsearch/trainer.hpp"

namespace ptsearch {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

// Written once before the work starts and again with end_time when done.
class Manifest {
 public:
  Manifest(fs::path path, std::string command,
           std::span<const std::string> argv, std::uint64_t seed)
      : path_(std::move(path)) {
    doc_["command"] = std::move(command);
    doc_["argv"] = std::vector<std::string>(argv.begin(), argv.end());
    doc_["seed"] = seed;
    doc_["version"] = PTSEARCH_VERSION;
    doc_["config"] = ojson::object();
    doc_["outputs"] = ojson::array();
    doc_["start_time"] = nullptr;
    doc_["end_time"] = nullptr;
  }

  ojson& config() { return doc_["config"]; }
  void add_output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

  void start() {
    doc_["start_time"] = utc_now();
    flush();
  }
  void finish() {
    doc_["end_time"] = utc_now();
    flush();
  }

 private:
  void flush() const { write_text(path_, doc_.dump(2) + "\n"); }

  fs::path path_;
  ojson doc_;
};

fs::path sidecar(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

struct DataOpts {
  std::string dir;
  std::string splits = "splits.json";
};

void add_data_opts(CLI::App* cmd, DataOpts& o) {
  cmd->add_option("--data", o.dir, "Dataset directory")->required();
  cmd->add_option("--splits", o.splits,
                  "Split file inside the dataset directory")
      ->capture_default_str();
}

struct TrainOpts {
  std::string preset;
  double lr = 0;
  double weight_decay = 0;
  std::size_t epochs = 0;
  std::size_t hidden = 0;
  double input_dropout = 0;
  double layer_dropout = 0;
  std::string gate;
  std::string skip;
  CLI::Option* o_lr = nullptr;
  CLI::Option* o_wd = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_hidden = nullptr;
  CLI::Option* o_in = nullptr;
  CLI::Option* o_layer = nullptr;
};

void add_train_opts(CLI::App* cmd, TrainOpts& o, const std::string& onoff) {
  o.gate = onoff;
  o.skip = onoff;
  cmd->add_option("--preset", o.preset,
                  "Hyperparameter preset: cora, citeseer, pubmed, ogbn-arxiv "
                  "or default (falls back to the dataset name)");
  o.o_lr = cmd->add_option("--lr", o.lr, "Adam learning rate");
  o.o_wd = cmd->add_option("--weight-decay", o.weight_decay, "L2 factor");
  o.o_epochs = cmd->add_option("--epochs", o.epochs, "Training epochs");
  o.o_hidden = cmd->add_option("--hidden", o.hidden, "Hidden width");
  o.o_in = cmd->add_option("--input-dropout", o.input_dropout,
                           "Dropout on input features");
  o.o_layer = cmd->add_option("--layer-dropout", o.layer_dropout,
                              "Dropout before every T layer");
  cmd->add_option("--gate", o.gate, "Gated propagation")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--skip", o.skip, "T-side skip connections")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

TrainConfig resolve_config(const TrainOpts& o, const DatasetBundle& bundle) {
  TrainConfig c =
      TrainConfig::preset(o.preset.empty() ? bundle.meta.name : o.preset);
  if (*o.o_lr) c.lr = o.lr;
  if (*o.o_wd) c.weight_decay = o.weight_decay;
  if (*o.o_epochs) c.epochs = o.epochs;
  if (*o.o_hidden) c.hidden = o.hidden;
  if (*o.o_in) c.input_dropout = o.input_dropout;
  if (*o.o_layer) c.layer_dropout = o.layer_dropout;
  c.gate = o.gate == "on";
  c.skip = o.skip == "on";
  c.validate();
  return c;
}

DatasetBundle load(const DataOpts& o) { return load_dataset(o.dir, o.splits); }

ojson data_echo(const DataOpts& o) {
  return {{"data", o.dir}, {"splits", o.splits}};
}

// Search fitness: best validation accuracy. A diverging candidate scores 0.
FitnessFn make_fitness(const DatasetBundle& bundle, const TrainConfig& cfg,
                       std::uint64_t seed, std::ostream& err) {
  return [&bundle, cfg, seed, &err](const Genome& g) {
    try {
      return train_eval(g, bundle, cfg, seed).best_val_acc;
    } catch (const TrainingDiverged& e) {
      err << "warning: " << g.str() << " diverged at epoch " << e.epoch()
          << "; fitness 0\n";
      return 0.0;
    }
  };
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

// ---- train ----------------------------------------------------------------

struct TrainCmd {
  DataOpts data;
  TrainOpts train;
  std::string genome;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::string out;
};

int run_train(const TrainCmd& c, std::span<const std::string> argv,
              std::ostream& out) {
  const Genome genome = Genome::parse(c.genome);
  if (c.repeats < 1) throw ContractViolation("--repeats must be >= 1");
  const DatasetBundle bundle = load(c.data);
  const TrainConfig cfg = resolve_config(c.train, bundle);

  std::optional<Manifest> manifest;
  if (!c.out.empty()) {
    manifest.emplace(sidecar(c.out), "train", argv, c.seed);
    manifest->config() = data_echo(c.data);
    manifest->config()["genome"] = genome.str();
    manifest->config()["repeats"] = c.repeats;
    manifest->config()["train"] = cfg.to_json();
    manifest->add_output(c.out);
    manifest->start();
  }

  ojson result;
  if (c.repeats == 1) {
    result = train_eval(genome, bundle, cfg, c.seed).to_json();
  } else {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < c.repeats; ++i) seeds.push_back(c.seed + i);
    const RepeatSummary s = repeat_eval(genome, bundle, cfg, seeds);
    result = s.to_json();
    out << genome.str() << " test " << fmt(s.mean_test_acc) << " +- "
        << fmt(s.std_test_acc) << "\n";
  }
  if (c.out.empty()) {
    out << result.dump(2) << "\n";
  } else {
    write_text(c.out, result.dump(2) + "\n");
    manifest->finish();
  }
  return kExitOk;
}

// ---- search ---------------------------------------------------------------

struct SearchCmd {
  DataOpts data;
  TrainOpts train;
  SearchConfig search;
  std::string out;
};

void add_search_opts(CLI::App* cmd, SearchConfig& s) {
  cmd->add_option("--k", s.k, "Population size")->capture_default_str();
  cmd->add_option("--gens", s.generations, "Generations")
      ->capture_default_str();
  cmd->add_option("--m", s.m, "Tournament size")->capture_default_str();
  cmd->add_option("--max-len", s.max_len, "Longest genome mutation may grow")
      ->capture_default_str();
  cmd->add_option("--init-min", s.init_lo,
                  "Shortest interior of initial genomes")
      ->capture_default_str();
  cmd->add_option("--init-max", s.init_hi,
                  "Longest interior of initial genomes")
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "Root seed")->capture_default_str();
}

ojson search_echo(const SearchConfig& s) {
  return {{"k", s.k},           {"generations", s.generations},
          {"m", s.m},           {"max_len", s.max_len},
          {"init_min", s.init_lo}, {"init_max", s.init_hi}};
}

int run_search(const SearchCmd& c, std::span<const std::string> argv,
               std::ostream& out, std::ostream& err) {
  c.search.validate();
  const DatasetBundle bundle = load(c.data);
  const TrainConfig cfg = resolve_config(c.train, bundle);
  const fs::path dir(c.out);
  fs::create_directories(dir);

  Manifest manifest(dir / "manifest.json", "search", argv, c.search.seed);
  manifest.config() = data_echo(c.data);
  manifest.config()["search"] = search_echo(c.search);
  manifest.config()["train"] = cfg.to_json();
  manifest.add_output(dir / "history.jsonl");
  manifest.add_output(dir / "best.json");
  manifest.start();

  std::ofstream history(dir / "history.jsonl", std::ios::binary);
  if (!history) throw Error("cannot write " + (dir / "history.jsonl").string());
  const SearchResult r = evolve_search(
      c.search, make_fitness(bundle, cfg, c.search.seed, err), &history);
  history.close();

  ojson best;
  best["genome"] = r.best.genome.str();
  best["fitness"] = r.best.fitness;
  best["birth"] = r.best.birth;
  best["evaluations"] = r.evaluations;
  write_text(dir / "best.json", best.dump(2) + "\n");
  manifest.finish();
  out << "best " << r.best.genome.str() << " val " << fmt(r.best.fitness)
      << "\n";
  return kExitOk;
}

// ---- smoothness -----------------------------------------------------------

struct SmoothCmd {
  DataOpts data;
  TrainOpts train;
  std::string genome;
  std::uint64_t seed = 0;
  bool trained = false;
  std::string out;
};

int run_smoothness(const SmoothCmd& c, std::span<const std::string> argv,
                   std::ostream& out) {
  const Genome genome = Genome::parse(c.genome);
  const DatasetBundle bundle = load(c.data);
  const TrainConfig cfg = resolve_config(c.train, bundle);

  std::optional<Manifest> manifest;
  if (!c.out.empty()) {
    manifest.emplace(sidecar(c.out), "smoothness", argv, c.seed);
    manifest->config() = data_echo(c.data);
    manifest->config()["genome"] = genome.str();
    manifest->config()["trained"] = c.trained;
    manifest->config()["train"] = cfg.to_json();
    manifest->add_output(c.out);
    manifest->start();
  }

  const SparseGraph adj = normalize_adjacency(bundle.graph);
  PipelineModel model =
      c.trained
          ? train_model(genome, bundle, cfg, c.seed).best_model
          : build_model(genome,
                        {bundle.meta.num_features, cfg.hidden,
                         bundle.meta.num_classes},
                        {cfg.gate, cfg.skip},
                        {cfg.input_dropout, cfg.layer_dropout}, c.seed);
  const SmoothnessTrace trace = smoothness_trace(model, adj, bundle.features);

  std::ostringstream csv;
  csv << "layer,op,S\n" << std::setprecision(17);
  for (std::size_t l = 0; l < trace.values.size(); ++l) {
    csv << l << ','
        << (l == 0 ? std::string("input")
                   : std::string(1, static_cast<char>(trace.ops[l - 1])))
        << ',' << trace.values[l] << '\n';
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    write_text(c.out, csv.str());
    manifest->finish();
  }
  return kExitOk;
}

// ---- grid -----------------------------------------------------------------

struct GridCmd {
  DataOpts data;
  TrainOpts train;
  std::string space = "p-first";
  std::size_t max_depth = 10;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::string out;
};

struct GridEntry {
  std::size_t depth_p;
  std::size_t depth_t;
  Genome genome;
};

std::vector<GridEntry> grid_space(std::string_view space,
                                  std::size_t max_depth) {
  std::vector<GridEntry> v;
  auto repeat = [](std::vector<Op>& ops, Op op, std::size_t n) {
    ops.insert(ops.end(), n, op);
  };
  for (std::size_t a = 1; a <= max_depth; ++a) {
    if (space == "alternate") {
      std::vector<Op> ops;
      for (std::size_t i = 0; i < a; ++i) {
        ops.push_back(Op::P);
        ops.push_back(Op::T);
      }
      v.push_back({a, a, Genome(std::move(ops))});
      continue;
    }
    for (std::size_t b = 1; b <= max_depth; ++b) {
      std::vector<Op> ops;
      if (space == "p-first") {
        repeat(ops, Op::P, a);
        repeat(ops, Op::T, b);
        v.push_back({a, b, Genome(std::move(ops))});
      } else {
        repeat(ops, Op::T, b);
        repeat(ops, Op::P, a);
        ops.push_back(Op::T);
        v.push_back({a, b, Genome(std::move(ops))});
      }
    }
  }
  return v;
}

int run_grid(const GridCmd& c, std::span<const std::string> argv,
             std::ostream& out, std::ostream& err) {
  if (c.max_depth < 1) throw ContractViolation("--max-depth must be >= 1");
  if (c.repeats < 1) throw ContractViolation("--repeats must be >= 1");
  const std::vector<GridEntry> entries = grid_space(c.space, c.max_depth);
  const DatasetBundle bundle = load(c.data);
  const TrainConfig cfg = resolve_config(c.train, bundle);

  std::optional<Manifest> manifest;
  if (!c.out.empty()) {
    manifest.emplace(sidecar(c.out), "grid", argv, c.seed);
    manifest->config() = data_echo(c.data);
    manifest->config()["space"] = c.space;
    manifest->config()["max_depth"] = c.max_depth;
    manifest->config()["repeats"] = c.repeats;
    manifest->config()["train"] = cfg.to_json();
    manifest->add_output(c.out);
    manifest->start();
  }

  std::ofstream file;
  if (!c.out.empty()) {
    const fs::path p(c.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file.open(p, std::ios::binary);
    if (!file) throw Error("cannot write " + c.out);
  }
  std::ostream& csv = c.out.empty() ? out : file;
  csv << "space,depth_p,depth_t,genome,mean_test_acc,std_test_acc,"
         "mean_val_acc,diverged\n";
  for (const GridEntry& e : entries) {
    std::vector<double> tests;
    std::vector<double> vals;
    std::size_t diverged = 0;
    for (std::size_t i = 0; i < c.repeats; ++i) {
      try {
        const EvalResult r = train_eval(e.genome, bundle, cfg, c.seed + i);
        tests.push_back(r.test_acc_at_best_val);
        vals.push_back(r.best_val_acc);
      } catch (const TrainingDiverged& d) {
        err << "warning: " << e.genome.str() << " seed " << c.seed + i
            << " diverged at epoch " << d.epoch() << "\n";
        ++diverged;
      }
    }
    const auto [mean, sd] = mean_and_std(tests);
    csv << c.space << ',' << e.depth_p << ',' << e.depth_t << ','
        << e.genome.str() << ',' << fmt(mean) << ',' << fmt(sd) << ','
        << fmt(mean_and_std(vals).first) << ',' << diverged << '\n';
    csv.flush();
  }
  if (manifest) {
    file.close();
    manifest->finish();
  }
  return kExitOk;
}

// ---- gen-data -------------------------------------------------------------

struct GenDataCmd {
  SbmParams sbm;
  std::string out;
};

int run_gen_data(const GenDataCmd& c, std::span<const std::string> argv,
                 std::ostream& out) {
  const DatasetBundle bundle = gen_sbm(c.sbm);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  Manifest manifest(dir / "manifest.json", "gen-data", argv, c.sbm.seed);
  manifest.config() = {{"blocks", c.sbm.blocks},
                       {"nodes_per_block", c.sbm.nodes_per_block},
                       {"p_intra", c.sbm.p_intra},
                       {"p_inter", c.sbm.p_inter},
                       {"feature_dim", c.sbm.feature_dim}};
  manifest.add_output(dir);
  manifest.start();
  save_dataset(bundle, dir);
  manifest.finish();
  out << "wrote " << bundle.meta.num_nodes << " nodes, "
      << bundle.graph.num_undirected_edges() << " edges to " << dir.string()
      << "\n";
  return kExitOk;
}

// ---- sparsity-sweep -------------------------------------------------------

struct SweepCmd {
  DataOpts data;
  TrainOpts train;
  SearchConfig search;
  std::vector<double> fractions{0.0, 0.2, 0.4, 0.6, 0.8};
  std::size_t top = 10;
  std::string out;
};

int run_sweep(const SweepCmd& c, std::span<const std::string> argv,
              std::ostream& out, std::ostream& err) {
  c.search.validate();
  if (c.top < 1) throw ContractViolation("--top must be >= 1");
  for (double f : c.fractions) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw ContractViolation("--fractions entries must lie in [0, 1)");
    }
  }
  const DatasetBundle bundle = load(c.data);
  const TrainConfig cfg = resolve_config(c.train, bundle);

  std::optional<Manifest> manifest;
  if (!c.out.empty()) {
    manifest.emplace(sidecar(c.out), "sparsity-sweep", argv, c.search.seed);
    manifest->config() = data_echo(c.data);
    manifest->config()["fractions"] = c.fractions;
    manifest->config()["top"] = c.top;
    manifest->config()["search"] = search_echo(c.search);
    manifest->config()["train"] = cfg.to_json();
    manifest->add_output(c.out);
    manifest->start();
  }

  std::ostringstream csv;
  csv << "fraction,edges,mean_p_top,mean_len_top,best_genome,best_val_acc\n";
  for (double f : c.fractions) {
    const DatasetBundle sparse = drop_edges(bundle, f, c.search.seed);
    const SearchResult r = evolve_search(
        c.search, make_fitness(sparse, cfg, c.search.seed, err));
    std::vector<const Individual*> all;
    for (const HistoryRecord& h : r.history) all.push_back(&h.individual);
    std::stable_sort(all.begin(), all.end(),
                     [](const Individual* a, const Individual* b) {
                       return a->fitness > b->fitness;
                     });
    const std::size_t n = std::min(c.top, all.size());
    double p = 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p += static_cast<double>(all[i]->genome.count(Op::P));
      len += static_cast<double>(all[i]->genome.size());
    }
    csv << fmt(f) << ',' << sparse.graph.num_undirected_edges() << ','
        << fmt(p / static_cast<double>(n)) << ','
        << fmt(len / static_cast<double>(n)) << ',' << r.best.genome.str()
        << ',' << fmt(r.best.fitness) << '\n';
    out << "fraction " << fmt(f) << " best " << r.best.genome.str() << "\n";
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    write_text(c.out, csv.str());
    manifest->finish();
  }
  return kExitOk;
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Search over propagation/transformation pipelines for node "
               "classification",
               "ptsearch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PTSEARCH_VERSION);

  TrainCmd train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train and evaluate one genome");
  add_data_opts(train_cmd, train.data);
  add_train_opts(train_cmd, train.train, "on");
  train_cmd->add_option("--genome", train.genome, "Genome such as TPPT")
      ->required();
  train_cmd->add_option("--seed", train.seed, "Root seed")
      ->capture_default_str();
  train_cmd->add_option("--repeats", train.repeats,
                        "Seeds seed..seed+K-1; K >= 2 reports mean and std")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Result JSON (stdout if absent)");

  SearchCmd search;
  CLI::App* search_cmd =
      app.add_subcommand("search", "Aging-evolution search over genomes");
  add_data_opts(search_cmd, search.data);
  add_train_opts(search_cmd, search.train, "on");
  add_search_opts(search_cmd, search.search);
  search_cmd
      ->add_option("--out", search.out,
                   "Output directory: history.jsonl, best.json, manifest.json")
      ->required();

  SmoothCmd smooth;
  CLI::App* smooth_cmd = app.add_subcommand(
      "smoothness", "Per-layer smoothness trace as CSV (layer,op,S)");
  add_data_opts(smooth_cmd, smooth.data);
  add_train_opts(smooth_cmd, smooth.train, "off");
  smooth_cmd->add_option("--genome", smooth.genome, "Genome")->required();
  smooth_cmd->add_option("--seed", smooth.seed, "Root seed")
      ->capture_default_str();
  smooth_cmd->add_flag("--trained", smooth.trained,
                       "Trace the best-validation model instead of the "
                       "freshly initialized one");
  smooth_cmd->add_option("--out", smooth.out, "CSV file (stdout if absent)");

  GridCmd grid;
  CLI::App* grid_cmd = app.add_subcommand(
      "grid",
      "Fixed-pattern baselines: p-first P^a T^b, t-first T^b P^a T, "
      "alternate (PT)^a for depths 1..max-depth");
  add_data_opts(grid_cmd, grid.data);
  add_train_opts(grid_cmd, grid.train, "off");
  grid_cmd->add_option("--space", grid.space, "Architecture space")
      ->check(CLI::IsMember({"p-first", "t-first", "alternate"}))
      ->capture_default_str();
  grid_cmd->add_option("--max-depth", grid.max_depth, "Largest a and b")
      ->capture_default_str();
  grid_cmd->add_option("--repeats", grid.repeats, "Seeds per architecture")
      ->capture_default_str();
  grid_cmd->add_option("--seed", grid.seed, "Root seed")
      ->capture_default_str();
  grid_cmd->add_option("--out", grid.out, "CSV file (stdout if absent)");

  GenDataCmd gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen-data", "Write a synthetic stochastic-block-model dataset");
  gen_cmd->add_option("--blocks", gen.sbm.blocks, "Blocks (= classes)")
      ->capture_default_str();
  gen_cmd->add_option("--nodes-per-block", gen.sbm.nodes_per_block, "Nodes")
      ->capture_default_str();
  gen_cmd->add_option("--p-intra", gen.sbm.p_intra, "Intra-block edge prob.")
      ->capture_default_str();
  gen_cmd->add_option("--p-inter", gen.sbm.p_inter, "Inter-block edge prob.")
      ->capture_default_str();
  gen_cmd->add_option("--feature-dim", gen.sbm.feature_dim, "Feature width")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.sbm.seed, "Root seed")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output dataset directory")
      ->required();

  SweepCmd sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sparsity-sweep",
      "Drop a fraction of edges, search, and report the mean number of P "
      "operations among the top genomes");
  add_data_opts(sweep_cmd, sweep.data);
  add_train_opts(sweep_cmd, sweep.train, "on");
  add_search_opts(sweep_cmd, sweep.search);
  sweep_cmd->add_option("--fractions", sweep.fractions,
                        "Comma-separated edge-drop fractions")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--top", sweep.top, "Genomes averaged per fraction")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "CSV file (stdout if absent)");

  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PTSEARCH_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const CLI::App* sub = app.get_subcommands().empty()
                                  ? nullptr
                                  : app.get_subcommands().front()) {
      err << "see: ptsearch " << sub->get_name() << " --help\n";
    }
    return kExitInvalidArgs;
  }

  try {
    if (train_cmd->parsed()) return run_train(train, args, out);
    if (search_cmd->parsed()) return run_search(search, args, out, err);
    if (smooth_cmd->parsed()) return run_smoothness(smooth, args, out);
    if (grid_cmd->parsed()) return run_grid(grid, args, out, err);
    if (gen_cmd->parsed()) return run_gen_data(gen, args, out);
    if (sweep_cmd->parsed()) return run_sweep(sweep, args, out, err);
  } catch (const InvalidGenome& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidArgs;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidArgs;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoadError;
  } catch (const TrainingDiverged& e) {
    err << "error: training diverged at epoch " << e.epoch() << ": "
        << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInvalidArgs;
}

}  // namespace ptsearch
