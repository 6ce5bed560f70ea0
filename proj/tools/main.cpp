// Copyright 2026 The gnas Authors.
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

// gnas: dataset generation, training, evaluation, search and analysis.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gnas/checkpoint.hpp"
#include "gnas/dag.hpp"
#include "gnas/dag_io.hpp"
#include "gnas/encoder.hpp"
#include "gnas/error.hpp"
#include "gnas/gp.hpp"
#include "gnas/metrics.hpp"
#include "gnas/search.hpp"
#include "gnas/train.hpp"

namespace fs = std::filesystem;

namespace {

using namespace gnas;

struct SpaceFlags {
  int layers = 6;
  int ops = 6;

  void add(CLI::App* app) {
    app->add_option("--layers", layers, "Operation layers")->check(CLI::NonNegativeNumber);
    app->add_option("--ops", ops, "Operations, a prefix of the default list")
        ->check(CLI::Range(1, 6));
  }
  SearchSpace space() const { return SearchSpace::enas_subset(layers, ops); }
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

// A config argument is a path, or a preset name looked up in $GNAS_CONFIG_DIR.
fs::path resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  if (const char* dir = std::getenv("GNAS_CONFIG_DIR")) {
    for (const fs::path p : {fs::path(dir) / arg, fs::path(dir) / (arg + ".cfg")}) {
      if (fs::exists(p)) return p;
    }
    throw ConfigError("config '" + arg + "' not found (also searched GNAS_CONFIG_DIR=" +
                      std::string(dir) + ")");
  }
  throw ConfigError("config '" + arg + "' not found (set GNAS_CONFIG_DIR to use preset names)");
}

std::string meta_or(const Metadata& m, const std::string& key, const std::string& fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

struct Mean {
  double mean = 0.0;
  double stddev = 0.0;
};

Mean mean_std(const std::vector<double>& v) {
  Mean m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  SpaceFlags space;
  long long count = 2000;
  std::uint64_t seed = 0;
  std::string out;
  bool oracle = false;
  bool enumerate = false;
};

void run_gen_data(const GenDataArgs& a) {
  const SearchSpace space = a.space.space();
  std::vector<ArchitectureDag> dags;
  if (a.enumerate) {
    dags = enumerate_space(space);
  } else {
    if (a.count < 0) throw ConfigError("--count must be non-negative");
    Rng rng = make_rng(a.seed, "data");
    dags.reserve(static_cast<std::size_t>(a.count));
    for (long long i = 0; i < a.count; ++i) dags.push_back(sample_random(space, rng));
  }
  std::optional<OracleConfig> oracle;
  if (a.oracle) oracle = OracleConfig::for_space(space);

  std::vector<DagRecord> records;
  records.reserve(dags.size());
  std::size_t valid = 0;
  double path = 0.0, clustering = 0.0, perf = 0.0;
  for (auto& d : dags) {
    if (validate(d, space).is_valid) ++valid;
    path += avg_path_length(d);
    clustering += clustering_coefficient(d);
    std::optional<double> p;
    if (oracle) {
      p = synthetic_perf(*oracle, d);
      perf += *p;
    }
    records.push_back({std::move(d), p});
  }
  auto out = open_out(a.out);
  write_jsonl(out, records);

  const double n = static_cast<double>(records.size());
  std::printf("wrote %zu architectures to %s\n", records.size(), a.out.c_str());
  std::printf("space: %d layers, %d operations\n", space.num_op_layers(), space.num_operations());
  if (records.empty()) return;
  std::printf("validity: %.2f%%\n", 100.0 * static_cast<double>(valid) / n);
  std::printf("mean avg_path_length: %s\n", format_number(path / n).c_str());
  std::printf("mean clustering_coefficient: %s\n", format_number(clustering / n).c_str());
  if (oracle) std::printf("mean perf: %s\n", format_number(perf / n).c_str());
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string history;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void run_train(const TrainArgs& a) {
  TrainConfig cfg = load_train_config(resolve_config(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const auto records = read_jsonl(fs::path(a.data), cfg.space);
  const auto split = split_indices(records.size(), cfg.train_fraction, cfg.seed);
  std::vector<ArchitectureDag> train_set;
  train_set.reserve(split.train.size());
  for (auto i : split.train) train_set.push_back(records[i].dag);

  std::fprintf(stderr, "training on %zu of %zu architectures (%d iterations x %d epochs)\n",
               train_set.size(), records.size(), cfg.iterations, cfg.epochs);
  const IteratedResult r = iterated_training(cfg, train_set, [&](int it, const EpochStats& e) {
    if (!a.quiet) {
      std::fprintf(stderr, "iter %d epoch %d recon %.6g kl %.6g\n", it, e.epoch, e.recon, e.kl);
    }
  });

  const Metadata meta = {{"seed", std::to_string(cfg.seed)},
                         {"train_fraction", format_number(cfg.train_fraction)},
                         {"epochs", std::to_string(cfg.epochs)},
                         {"iterations", std::to_string(cfg.iterations)},
                         {"batch_size", std::to_string(cfg.batch_size)},
                         {"learning_rate", format_number(cfg.learning_rate)},
                         {"kl_weight", format_number(cfg.kl_weight)},
                         {"train_size", std::to_string(train_set.size())}};
  auto out = open_out(a.out);
  write_checkpoint(out, r.model, meta);
  const fs::path history = a.history.empty() ? fs::path(a.out + ".history.csv") : fs::path(a.history);
  auto hout = open_out(history);
  write_history_csv(hout, r.histories);
  const auto& last = r.histories.back().back();
  std::printf("final recon %s kl %s\n", format_number(last.recon).c_str(),
              format_number(last.kl).c_str());
  std::printf("checkpoint: %s\nhistory: %s\n", a.out.c_str(), history.string().c_str());
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string csv;
  std::uint64_t seed = 0;
  int threads = 1;
  bool all = false;
  int samples_z = 10;
  int decodes_per_z = 10;
  int prior_points = 1000;
  int prior_decodes = 10;
  int repeats = 10;
  double gp_train_fraction = 0.9;
};

void run_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const VaeModel& model = ck.model;
  const auto records = read_jsonl(fs::path(a.data), model.space());
  if (records.empty()) throw EmptyDataset("evaluation corpus is empty");

  std::vector<ArchitectureDag> test;
  if (a.all) {
    test = dags_of(records);
  } else {
    const auto seed = std::stoull(meta_or(ck.metadata, "seed", "0"));
    const double frac = std::stod(meta_or(ck.metadata, "train_fraction", "0.9"));
    const auto split = split_indices(records.size(), frac, seed);
    for (auto i : split.eval) test.push_back(records[i].dag);
    if (test.empty()) {
      std::fprintf(stderr, "note: the training split covers the corpus; using every record\n");
      test = dags_of(records);
    }
  }

  std::vector<std::pair<std::string, std::string>> rows;
  const double acc = reconstruction_accuracy(model, test, derive_seed(a.seed, "eval/recon"),
                                             a.samples_z, a.decodes_per_z, a.threads);
  const PriorReport prior = prior_validity(model, derive_seed(a.seed, "eval/prior"),
                                           a.prior_points, a.prior_decodes, a.threads);
  std::printf("architectures evaluated: %zu\n", test.size());
  std::printf("reconstruction accuracy: %.4f%%\n", acc);
  std::printf("prior validity: %.4f%% (%zu / %zu)\n", prior.validity, prior.valid, prior.total);
  if (prior.uniqueness) {
    std::printf("uniqueness: %.4f%%\n", *prior.uniqueness);
  } else {
    std::printf("uniqueness: n/a (no valid decodes)\n");
  }
  rows.push_back({"reconstruction_accuracy", format_number(acc)});
  rows.push_back({"prior_validity", format_number(prior.validity)});
  rows.push_back({"uniqueness", prior.uniqueness ? format_number(*prior.uniqueness) : "nan"});

  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].perf) labeled.push_back(i);
  }
  if (labeled.size() < 4) {
    std::printf("predictive performance: skipped (corpus has no perf labels)\n");
  } else {
    std::vector<ArchitectureDag> dags;
    Vector y(static_cast<Eigen::Index>(labeled.size()));
    for (std::size_t k = 0; k < labeled.size(); ++k) {
      dags.push_back(records[labeled[k]].dag);
      y(static_cast<Eigen::Index>(k)) = *records[labeled[k]].perf;
    }
    const Matrix z = encode_means(model, dags);
    std::vector<double> rmses, rs;
    for (int rep = 0; rep < a.repeats; ++rep) {
      const auto split = split_indices(labeled.size(), a.gp_train_fraction,
                                       derive_seed(a.seed, "eval/gp-split", static_cast<std::uint64_t>(rep)));
      if (split.eval.empty()) throw ConfigError("GP split leaves no held-out points");
      Matrix xt(static_cast<Eigen::Index>(split.train.size()), z.cols());
      Vector yt(xt.rows());
      for (std::size_t k = 0; k < split.train.size(); ++k) {
        xt.row(static_cast<Eigen::Index>(k)) = z.row(static_cast<Eigen::Index>(split.train[k]));
        yt(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(split.train[k]));
      }
      GpConfig gc;
      gc.seed = derive_seed(a.seed, "eval/gp", static_cast<std::uint64_t>(rep));
      const GpSurrogate gp = fit_gp(xt, yt, gc);
      std::vector<double> pred, truth;
      for (auto i : split.eval) {
        pred.push_back(gp.predict(z.row(static_cast<Eigen::Index>(i)).transpose()).mean);
        truth.push_back(y(static_cast<Eigen::Index>(i)));
      }
      rmses.push_back(rmse(pred, truth));
      try {
        rs.push_back(pearson_r(pred, truth));
      } catch (const ZeroVariance&) {
        rs.push_back(std::nan(""));
      }
    }
    const Mean m_rmse = mean_std(rmses);
    const Mean m_r = mean_std(rs);
    std::printf("GP RMSE: %.6f +- %.6f (%d splits)\n", m_rmse.mean, m_rmse.stddev, a.repeats);
    std::printf("GP Pearson r: %.6f +- %.6f (%d splits)\n", m_r.mean, m_r.stddev, a.repeats);
    rows.push_back({"gp_rmse_mean", format_number(m_rmse.mean)});
    rows.push_back({"gp_rmse_std", format_number(m_rmse.stddev)});
    rows.push_back({"gp_pearson_mean", format_number(m_r.mean)});
    rows.push_back({"gp_pearson_std", format_number(m_r.stddev)});
  }

  if (!a.csv.empty()) {
    auto out = open_out(a.csv);
    out << "metric,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
  }
}

// ------------------------------------------------------------------ search

struct SearchArgs {
  std::string checkpoint;
  std::string data;
  std::string history = "bo_history.csv";
  std::string top = "top.jsonl";
  int iterations = 10;
  int batch = 50;
  int top_k = 5;
  std::uint64_t seed = 0;
};

void run_search(const SearchArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto records = read_jsonl(fs::path(a.data), ck.model.space());
  const OracleConfig oracle = OracleConfig::for_space(ck.model.space());
  BoConfig cfg;
  cfg.iterations = a.iterations;
  cfg.batch_size = a.batch;
  cfg.top_k = a.top_k;
  cfg.gp.seed = derive_seed(a.seed, "bo/gp-config");
  Rng rng = make_rng(a.seed, "bo");
  const BoResult r = bo_loop(
      ck.model, [&](const ArchitectureDag& d) { return synthetic_perf(oracle, d); }, records, cfg,
      rng);

  auto hout = open_out(a.history);
  write_bo_history_csv(hout, r.history);
  std::vector<DagRecord> top;
  for (const auto& s : r.top) top.push_back({s.dag, s.score});
  auto tout = open_out(a.top);
  write_jsonl(tout, top);

  for (const auto& h : r.history) {
    std::printf("iteration %d: evaluations %zu best %.6f batch mean %.6f\n", h.iteration,
                h.evaluations, h.best_score, h.batch_mean_score);
  }
  std::printf("invalid decodes: %zu\n", r.invalid_decodes);
  for (std::size_t i = 0; i < r.top.size(); ++i) {
    std::printf("top %zu: %.6f %s\n", i + 1, r.top[i].score, serialize(r.top[i].dag).c_str());
  }
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  SpaceFlags space;
  std::string data;
  std::string out_dir = ".";
  int bins = 6;
};

void run_analyze(const AnalyzeArgs& a) {
  const auto records = read_jsonl(fs::path(a.data), a.space.space());
  const CorrelationReport r = correlation_report(records, a.bins);
  const fs::path dir(a.out_dir);
  auto bout = open_out(dir / "bins.csv");
  write_bins_csv(bout, r);
  auto pout = open_out(dir / "points.csv");
  write_points_csv(pout, r);
  auto show = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("n/a");
  };
  std::printf("architectures: %zu\n", r.perf.size());
  std::printf("pearson r(perf, avg_path_length): %s\n", show(r.r_path_length).c_str());
  std::printf("pearson r(perf, clustering_coefficient): %s\n", show(r.r_clustering).c_str());
  for (const auto& b : r.bins) {
    std::printf("bin %d: n=%zu perf [%.4f, %.4f] L %.4f C %.4f\n", b.bin, b.count, b.perf.min,
                b.perf.max, b.path_length.mean, b.clustering.mean);
  }
}

// ----------------------------------------------------------------- project

struct ProjectArgs {
  std::string checkpoint;
  std::string data;
  std::string out = "projection.csv";
};

void run_project(const ProjectArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto records = read_jsonl(fs::path(a.data), ck.model.space());
  const Projection p = latent_projection_2d(ck.model, records);
  auto out = open_out(a.out);
  write_projection_csv(out, p, records);
  std::printf("projected %zu architectures to %s\n", records.size(), a.out.c_str());
  std::printf("explained variance: %s, %s of %s\n", format_number(p.eigenvalues(0)).c_str(),
              format_number(p.eigenvalues(1)).c_str(), format_number(p.eigenvalues.sum()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Architecture search in a learned DAG latent space"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GNAS_VERSION_STRING);

  GenDataArgs gen;
  auto* cmd_gen = app.add_subcommand("gen-data", "Sample (or enumerate) a corpus of architectures");
  gen.space.add(cmd_gen);
  cmd_gen->add_option("--count", gen.count, "Number of sampled architectures");
  cmd_gen->add_option("--seed", gen.seed, "Root seed");
  cmd_gen->add_option("--out,-o", gen.out, "Output JSONL")->required();
  cmd_gen->add_flag("--oracle", gen.oracle, "Attach synthetic perf labels");
  cmd_gen->add_flag("--enumerate", gen.enumerate, "Write the whole space instead of sampling");

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Train the auto-encoder");
  cmd_train->add_option("--config,-c", tr.config, "Config file or preset name")->required();
  cmd_train->add_option("--data,-d", tr.data, "Training corpus (JSONL)")->required();
  cmd_train->add_option("--out,-o", tr.out, "Checkpoint path")->required();
  cmd_train->add_option("--history", tr.history, "History CSV (default <out>.history.csv)");
  cmd_train->add_option("--seed", tr.seed, "Override the config seed");
  cmd_train->add_flag("--quiet,-q", tr.quiet, "No per-epoch progress");
  int train_threads = 1;
  cmd_train->add_option("--threads", train_threads, "Accepted for uniformity; training is serial");

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "Generative and predictive metrics");
  cmd_eval->add_option("--checkpoint,-m", ev.checkpoint)->required();
  cmd_eval->add_option("--data,-d", ev.data, "Corpus (JSONL)")->required();
  cmd_eval->add_option("--csv", ev.csv, "Also write metric,value rows here");
  cmd_eval->add_option("--seed", ev.seed);
  cmd_eval->add_option("--threads", ev.threads)->check(CLI::PositiveNumber);
  cmd_eval->add_flag("--all", ev.all, "Reconstruct every record, not just the held-out split");
  cmd_eval->add_option("--samples-z", ev.samples_z)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--decodes-per-z", ev.decodes_per_z)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--prior-points", ev.prior_points)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--prior-decodes", ev.prior_decodes)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--repeats", ev.repeats, "GP train/test splits")->check(CLI::PositiveNumber);

  SearchArgs se;
  auto* cmd_search = app.add_subcommand("search", "Batch Bayesian optimization against the oracle");
  cmd_search->add_option("--checkpoint,-m", se.checkpoint)->required();
  cmd_search->add_option("--data,-d", se.data, "Initial corpus (JSONL)")->required();
  cmd_search->add_option("--iterations", se.iterations)->check(CLI::PositiveNumber);
  cmd_search->add_option("--batch", se.batch)->check(CLI::PositiveNumber);
  cmd_search->add_option("--top-k", se.top_k)->check(CLI::PositiveNumber);
  cmd_search->add_option("--history", se.history, "BO history CSV");
  cmd_search->add_option("--top", se.top, "Top architectures JSONL");
  cmd_search->add_option("--seed", se.seed);
  int search_threads = 1;
  cmd_search->add_option("--threads", search_threads, "Accepted for uniformity; search is serial");

  AnalyzeArgs an;
  auto* cmd_analyze = app.add_subcommand("analyze", "Perf vs graph-metric correlation report");
  an.space.add(cmd_analyze);
  cmd_analyze->add_option("--data,-d", an.data, "Labeled corpus (JSONL)")->required();
  cmd_analyze->add_option("--out-dir", an.out_dir, "Directory for bins.csv and points.csv");
  cmd_analyze->add_option("--bins", an.bins)->check(CLI::PositiveNumber);

  ProjectArgs pr;
  auto* cmd_project = app.add_subcommand("project", "2-D PCA projection of latent means");
  cmd_project->add_option("--checkpoint,-m", pr.checkpoint)->required();
  cmd_project->add_option("--data,-d", pr.data, "Labeled corpus (JSONL)")->required();
  cmd_project->add_option("--out,-o", pr.out, "Projection CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*cmd_gen) run_gen_data(gen);
    if (*cmd_train) run_train(tr);
    if (*cmd_eval) run_eval(ev);
    if (*cmd_search) run_search(se);
    if (*cmd_analyze) run_analyze(an);
    if (*cmd_project) run_project(pr);
  } catch (const gnas::ParseError& e) {
    std::fprintf(stderr, "gnas: parse error: %s\n", e.what());
    return 2;
  } catch (const gnas::ConfigError& e) {
    std::fprintf(stderr, "gnas: config error: %s\n", e.what());
    return 2;
  } catch (const gnas::Error& e) {
    std::fprintf(stderr, "gnas: error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gnas: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
