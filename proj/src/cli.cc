// Copyright 2026 The LR-GMML Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lrgmml/cli.h"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "lrgmml/errors.h"
#include "lrgmml/gradcheck.h"
#include "lrgmml/io.h"
#include "lrgmml/objective.h"
#include "lrgmml/pipeline.h"

namespace lrgmml {
namespace {

struct DataOptions {
  std::string format = "auto";
  bool header = false;
  std::string label_column = "last";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--format", format, "Input format: auto, csv or libsvm")
        ->check(CLI::IsMember({"auto", "csv", "libsvm"}));
    cmd->add_flag("--header", header, "CSV input has a header row");
    cmd->add_option("--label-column", label_column,
                    "CSV label column: 'last' or a 0-based index");
  }

  void validate() const {
    if (label_column != "last") {
      try {
        std::size_t used = 0;
        const int idx = std::stoi(label_column, &used);
        if (used != label_column.size() || idx < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw InvalidArgument("--label-column must be 'last' or a non-negative index");
      }
    }
  }

  Dataset load(const std::string& path) const {
    if (!std::filesystem::exists(path)) throw IoError("missing file '" + path + "'");
    std::string fmt = format;
    if (fmt == "auto") {
      const std::string ext = std::filesystem::path(path).extension().string();
      fmt = (ext == ".svm" || ext == ".libsvm") ? "libsvm" : "csv";
    }
    Dataset data;
    if (fmt == "libsvm") {
      data = load_libsvm(path);
    } else {
      LabelColumn col;
      if (label_column != "last") col.index = std::stoi(label_column);
      data = load_csv(path, col, header);
    }
    data.validate();
    return data;
  }
};

struct SolverFlags {
  int max_iters = SolverOptions{}.max_iters;
  double grad_tol = SolverOptions{}.grad_tol;
  double armijo_c1 = SolverOptions{}.armijo_c1;
  double initial_step = SolverOptions{}.initial_step;
  std::string beta = "hs";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-iters", max_iters, "Solver iteration limit");
    cmd->add_option("--grad-tol", grad_tol, "Relative gradient-norm tolerance");
    cmd->add_option("--armijo-c1", armijo_c1, "Armijo sufficient-decrease constant");
    cmd->add_option("--initial-step", initial_step, "Largest trial step");
    cmd->add_option("--beta", beta, "CG rule: hs, pr or sd")
        ->check(CLI::IsMember({"hs", "pr", "sd"}));
  }

  SolverOptions options() const {
    SolverOptions opts;
    opts.max_iters = max_iters;
    opts.grad_tol = grad_tol;
    opts.armijo_c1 = armijo_c1;
    opts.initial_step = initial_step;
    opts.beta_rule = beta == "pr"   ? BetaRule::kPolakRibiere
                     : beta == "sd" ? BetaRule::kSteepestDescent
                                    : BetaRule::kHestenesStiefel;
    opts.validate();
    return opts;
  }
};

void require_t_range(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("--t must lie in [0, 1]");
}

// Test labels re-expressed in the training set's class ids. Unseen labels get
// fresh ids and can never be predicted.
void align_labels(const Dataset& train, Dataset* test) {
  std::unordered_map<std::string, int> ids;
  for (std::size_t k = 0; k < train.class_names.size(); ++k) {
    ids.emplace(train.class_names[k], static_cast<int>(k));
  }
  int next = static_cast<int>(train.class_names.size());
  std::vector<std::string> names = train.class_names;
  for (int& label : test->labels) {
    const std::string& name = test->class_names[static_cast<std::size_t>(label)];
    auto it = ids.find(name);
    if (it == ids.end()) {
      it = ids.emplace(name, next++).first;
      names.push_back(name);
    }
    label = it->second;
  }
  test->class_names = std::move(names);
}

PairSets pairs_for(const Dataset& data, int pairs, std::uint64_t seed,
                   std::ostream& err) {
  PairCounts counts = default_pair_counts(data.labels);
  if (pairs > 0) counts = {pairs, pairs};
  std::vector<std::string> warnings;
  PairSets out = generate_pairs(data.labels, std::max(1, counts.similar),
                                std::max(1, counts.dissimilar), seed, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return out;
}

std::string plot_path_for(const std::string& results_path) {
  std::filesystem::path p(results_path);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string() + ".plot.csv";
}

int run_train(const std::string& data_path, const DataOptions& data_opts,
              const std::string& rank_arg, const std::string& t_arg, int pairs,
              std::uint64_t seed, const std::string& out_path,
              const SolverFlags& solver_flags, bool standardize, int k,
              std::ostream& out, std::ostream& err) {
  data_opts.validate();
  const SolverOptions solver = solver_flags.options();
  const bool auto_t = t_arg == "auto";
  double t = 0.5;
  if (!auto_t) {
    try {
      t = std::stod(t_arg);
    } catch (const std::exception&) {
      throw InvalidArgument("--t must be a number in [0, 1] or 'auto'");
    }
    require_t_range(t);
  }
  if (pairs < 0) throw InvalidArgument("--pairs must be positive");

  Dataset data = data_opts.load(data_path);
  int rank = 0;
  if (rank_arg == "d") {
    rank = data.d();
  } else {
    try {
      rank = std::stoi(rank_arg);
    } catch (const std::exception&) {
      throw InvalidArgument("--rank must be an integer or 'd'");
    }
  }
  if (rank < 1 || rank > data.d()) {
    throw InvalidArgument("--rank " + std::to_string(rank) + " outside [1, " +
                          std::to_string(data.d()) + "]");
  }
  if (standardize) data.features = Standardizer::fit(data.features).apply(data.features);

  if (auto_t) {
    const ExperimentConfig defaults;
    t = select_t(data, rank, defaults.t_grid, k, defaults.pairs_per_class_pair,
                 solver, cell_seed(seed, 0, 0, -3))
            .t;
  }
  const PairSets pair_sets = pairs_for(data, pairs, seed, err);
  const TrainResult trained = train_lrgmml(data, pair_sets, rank, t, solver, seed);

  const PairScatter sc_s = build_scatter(data.features, pair_sets.similar);
  const PairScatter sc_d = build_scatter(data.features, pair_sets.dissimilar);
  std::ostringstream trace_csv;
  trained.trace.write_csv(trace_csv);
  save_model(trained.model, out_path);
  write_file_atomic(out_path + ".trace.csv", trace_csv.str());

  const auto& last = trained.trace.records.back();
  out << "t " << format_double(t) << '\n'
      << "rank " << rank << '\n'
      << "iterations " << trained.trace.iterations() << '\n'
      << "termination " << to_string(trained.trace.termination) << '\n'
      << "cost " << format_double(last.cost) << '\n'
      << "trace_cost " << format_double(trace_cost(trained.model, sc_s, sc_d)) << '\n'
      << "model " << out_path << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& train_path,
             const std::string& test_path, int k, std::string results_path,
             const std::string& method, bool standardize,
             const DataOptions& data_opts, std::ostream& out) {
  data_opts.validate();
  const Method m = method_from_string(method);
  if (k < 1) throw InvalidArgument("--k must be >= 1");
  if (!std::filesystem::exists(model_path)) {
    throw IoError("missing file '" + model_path + "'");
  }
  if (results_path.empty()) results_path = model_path + ".eval.csv";
  const MetricModel model = load_model(model_path);
  Dataset train = data_opts.load(train_path);
  Dataset test = data_opts.load(test_path);
  if (train.d() != model.d() || test.d() != model.d()) {
    throw InvalidArgument("model has d=" + std::to_string(model.d()) +
                          " but data have d=" + std::to_string(train.d()) + " and " +
                          std::to_string(test.d()));
  }
  if (k > train.n()) throw InvalidArgument("--k exceeds the number of training rows");
  align_labels(train, &test);
  if (standardize) {
    const Standardizer s = Standardizer::fit(train.features);
    train.features = s.apply(train.features);
    test.features = s.apply(test.features);
  }
  const double error = knn_error(embed(model, train.features), train.labels,
                                 embed(model, test.features), test.labels, k);
  ResultRecord rec;
  rec.dataset = train.name;
  rec.method = m;
  rec.rank = model.r();
  rec.t = model.t;
  rec.error = error;
  std::ostringstream csv;
  write_results(csv, {rec});
  write_file_atomic(results_path, csv.str());
  out << "error " << format_double(error) << '\n';
  return 0;
}

int run_sweep(const std::string& data_path, const DataOptions& data_opts,
              const std::string& ranks_arg, const std::string& config_path,
              const std::string& out_path, std::string plot_path, bool timing,
              std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  data_opts.validate();
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = parse_experiment_config(read_file(config_path));
  if (seed) cfg.seed = *seed;
  std::vector<std::string> rank_tokens;
  if (!ranks_arg.empty()) {
    std::stringstream ss(ranks_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) rank_tokens.push_back(tok);
    for (const auto& tok : rank_tokens) {
      if (tok == "d") continue;
      try {
        std::size_t used = 0;
        const int r = std::stoi(tok, &used);
        if (used != tok.size() || r < 1) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw InvalidArgument("--ranks entries must be positive integers or 'd'");
      }
    }
  }
  if (plot_path.empty()) plot_path = plot_path_for(out_path);

  Dataset data = data_opts.load(data_path);
  if (!rank_tokens.empty()) {
    cfg.rank_list.clear();
    for (const auto& tok : rank_tokens) {
      cfg.rank_list.push_back(tok == "d" ? data.d() : std::stoi(tok));
    }
  }
  cfg.validate();
  for (int r : cfg.rank_list) {
    if (r > data.d()) {
      throw InvalidArgument("rank " + std::to_string(r) + " exceeds d=" +
                            std::to_string(data.d()));
    }
  }

  std::vector<ResultRecord> records = run_experiment(data, cfg);
  for (auto& rec : records) {
    if (!rec.ok()) {
      err << "warning: run " << rec.run << " rank " << rec.rank << " "
          << to_string(rec.method) << " failed: " << rec.failure << '\n';
    }
    if (!timing) rec.seconds = 0.0;
  }
  const std::vector<PlotPoint> plot = summarize(records);
  std::ostringstream results_csv;
  write_results(results_csv, records);
  std::ostringstream plot_csv;
  write_plot_data(plot_csv, plot);
  write_file_atomic(out_path, results_csv.str());
  write_file_atomic(plot_path, plot_csv.str());
  for (const PlotPoint& p : plot) {
    out << to_string(p.method) << " rank " << p.rank << " error "
        << format_double(p.mean_error) << " +- " << format_double(p.std_error) << '\n';
  }
  return 0;
}

int run_gradcheck(int d, int rank, std::uint64_t seed, const std::vector<double>& ts,
                  int instances, int directions, std::ostream& out) {
  if (d < 1 || rank < 1 || rank > d) throw InvalidArgument("need 1 <= --rank <= --d");
  for (double t : ts) require_t_range(t);
  const GradCheckReport report = gradient_check(d, rank, ts, instances, directions, seed);
  out << "kappa " << format_double(report.kappa_mean) << '\n'
      << "kappa_rel_std " << format_double(report.kappa_rel_std) << '\n'
      << "max_rel_error " << format_double(report.max_rel_error) << '\n';
  return report.passed() ? 0 : static_cast<int>(ErrorKind::kNumerical);
}

int run_gmml_baseline(const std::string& data_path, const DataOptions& data_opts,
                      double t, int pairs, std::uint64_t seed,
                      const std::string& out_path, bool standardize,
                      std::ostream& out, std::ostream& err) {
  data_opts.validate();
  require_t_range(t);
  if (pairs < 0) throw InvalidArgument("--pairs must be positive");
  Dataset data = data_opts.load(data_path);
  if (data.d() > kMaxExplicitDim) {
    throw InvalidArgument("d=" + std::to_string(data.d()) +
                          " is too large for full-rank GMML; use 'train' instead");
  }
  if (standardize) data.features = Standardizer::fit(data.features).apply(data.features);
  const PairSets pair_sets = pairs_for(data, pairs, seed, err);
  const MetricModel model = train_gmml(data, pair_sets, t);
  save_model(model, out_path);
  const PairScatter sc_s = build_scatter(data.features, pair_sets.similar);
  const PairScatter sc_d = build_scatter(data.features, pair_sets.dissimilar);
  out << "cost " << format_double(full_rank_cost(model.b, sc_s, sc_d, t)) << '\n'
      << "model " << out_path << '\n';
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Low-rank geometric mean metric learning"};
  app.require_subcommand(1);

  DataOptions data_opts;
  SolverFlags solver_flags;

  std::string data_path, out_path, rank_arg, t_arg = "auto";
  int pairs = 0;
  std::uint64_t seed = 0;
  bool standardize = false;
  int k = 5;
  CLI::App* train = app.add_subcommand("train", "Learn a low-rank metric");
  train->add_option("--data", data_path, "Training data")->required();
  train->add_option("--rank", rank_arg, "Subspace dimension r, or 'd'")->required();
  train->add_option("--t", t_arg, "Weight t in [0, 1], or 'auto'");
  train->add_option("--pairs", pairs, "Similar and dissimilar pair count each");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--out", out_path, "Model file to write")->required();
  train->add_flag("--standardize", standardize, "z-score features first");
  train->add_option("--k", k, "Neighbours used when selecting t");
  data_opts.add_to(train);
  solver_flags.add_to(train);

  std::string model_path, train_path, test_path, results_path, method = "lrgmml";
  CLI::App* eval = app.add_subcommand("eval", "k-NN error of a saved model");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--train", train_path, "Reference (training) data")->required();
  eval->add_option("--test", test_path, "Query (test) data")->required();
  eval->add_option("--k", k, "Number of neighbours");
  eval->add_option("--results", results_path, "Results CSV to write");
  eval->add_option("--method", method, "Method label for the results row")
      ->check(CLI::IsMember({"lrgmml", "gmml", "euclidean"}));
  eval->add_flag("--standardize", standardize, "z-score with training statistics");
  data_opts.add_to(eval);

  std::string ranks_arg, config_path, plot_path;
  bool timing = false;
  CLI::App* sweep = app.add_subcommand("sweep", "Rank sweep with k-NN evaluation");
  sweep->add_option("--data", data_path, "Dataset")->required();
  sweep->add_option("--ranks", ranks_arg, "Comma-separated ranks; 'd' is the full dimension");
  sweep->add_option("--config", config_path, "JSON experiment configuration");
  CLI::Option* sweep_seed =
      sweep->add_option("--seed", seed, "Random seed (overrides the config's seed)");
  sweep->add_option("--out", out_path, "Results CSV to write")->required();
  sweep->add_option("--plot-out", plot_path, "Plot-data CSV (default: <out>.plot.csv)");
  sweep->add_flag("--timing", timing, "Record wall-clock seconds in the results");
  data_opts.add_to(sweep);

  int dim = 0;
  int check_rank = 0;
  std::vector<double> ts{0.3, 0.5, 0.7};
  int instances = 5;
  int directions = 20;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--d", dim, "Ambient dimension")->required();
  gradcheck->add_option("--rank", check_rank, "Subspace dimension")->required();
  gradcheck->add_option("--seed", seed, "Random seed");
  gradcheck->add_option("--t", ts, "Weights t (cycled over instances)");
  gradcheck->add_option("--instances", instances, "Random instances");
  gradcheck->add_option("--directions", directions, "Tangent directions per instance");

  double baseline_t = 0.5;
  CLI::App* baseline = app.add_subcommand("gmml-baseline", "Full-rank closed-form metric");
  baseline->add_option("--data", data_path, "Training data")->required();
  baseline->add_option("--t", baseline_t, "Weight t in [0, 1]")->required();
  baseline->add_option("--out", out_path, "Model file to write")->required();
  baseline->add_option("--pairs", pairs, "Similar and dissimilar pair count each");
  baseline->add_option("--seed", seed, "Random seed");
  baseline->add_flag("--standardize", standardize, "z-score features first");
  data_opts.add_to(baseline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*train) {
      return run_train(data_path, data_opts, rank_arg, t_arg, pairs, seed, out_path,
                       solver_flags, standardize, k, out, err);
    }
    if (*eval) {
      return run_eval(model_path, train_path, test_path, k, results_path, method,
                      standardize, data_opts, out);
    }
    if (*sweep) {
      return run_sweep(data_path, data_opts, ranks_arg, config_path, out_path,
                       plot_path, timing,
                       sweep_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                       out, err);
    }
    if (*gradcheck) {
      return run_gradcheck(dim, check_rank, seed, ts, instances, directions, out);
    }
    if (*baseline) {
      return run_gmml_baseline(data_path, data_opts, baseline_t, pairs, seed, out_path,
                               standardize, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kNumerical);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace lrgmml
