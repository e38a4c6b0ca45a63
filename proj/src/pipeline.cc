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

#include "lrgmml/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

std::vector<std::vector<int>> members_by_class(std::span<const int> labels) {
  int num_classes = 0;
  for (int label : labels) {
    if (label < 0) throw InvalidArgument("class ids must be non-negative");
    num_classes = std::max(num_classes, label + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return members;
}

double evaluate_model(const MetricModel& model, const Dataset& train,
                      const Dataset& test, int k) {
  return knn_error(embed(model, train.features), train.labels,
                   embed(model, test.features), test.labels,
                   std::min(k, train.n()));
}

}  // namespace

int Dataset::num_classes() const {
  int c = 0;
  for (int label : labels) c = std::max(c, label + 1);
  return c;
}

Dataset Dataset::subset(std::span<const int> idx) const {
  Dataset out;
  out.name = name;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int i = idx[k];
    if (i < 0 || i >= n()) throw InvalidArgument("Dataset::subset: index out of range");
    out.features.row(static_cast<Eigen::Index>(k)) = features.row(i);
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgument("dataset " + name + ": " + std::to_string(features.rows()) +
                          " feature rows but " + std::to_string(labels.size()) +
                          " labels");
  }
  if (features.rows() == 0 || features.cols() == 0) {
    throw InvalidArgument("dataset " + name + " is empty");
  }
  if (!features.allFinite()) {
    throw InvalidArgument("dataset " + name + " has non-finite feature values");
  }
}

PairCounts default_pair_counts(std::span<const int> labels, int per_class_pair) {
  const auto members = members_by_class(labels);
  long long c = 0;
  long long same = 0;
  long long total = static_cast<long long>(labels.size());
  long long cross = total * (total - 1) / 2;
  for (const auto& m : members) {
    const long long nk = static_cast<long long>(m.size());
    if (nk > 0) ++c;
    same += nk * (nk - 1) / 2;
  }
  cross -= same;
  const long long wanted = static_cast<long long>(per_class_pair) * c * (c - 1);
  return {static_cast<int>(std::min(wanted, same)),
          static_cast<int>(std::min(wanted, cross))};
}

PairSets generate_pairs(std::span<const int> labels, int count_s, int count_d,
                        std::uint64_t seed, std::vector<std::string>* warnings) {
  if (count_s < 1 || count_d < 1) {
    throw InvalidArgument("generate_pairs: pair counts must be >= 1");
  }
  const auto members = members_by_class(labels);
  std::vector<double> weights;
  std::vector<int> eligible;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const double nk = static_cast<double>(members[k].size());
    if (members[k].empty()) continue;
    if (members[k].size() < 2) {
      if (warnings) {
        warnings->push_back("class " + std::to_string(k) +
                            " has fewer than 2 samples; excluded from similar pairs");
      }
      continue;
    }
    eligible.push_back(static_cast<int>(k));
    weights.push_back(nk * (nk - 1.0) / 2.0);
  }
  if (eligible.empty()) {
    throw InvalidArgument("generate_pairs: no class has two samples; no similar pairs");
  }
  int present = 0;
  for (const auto& m : members) present += m.empty() ? 0 : 1;
  if (present < 2) {
    throw InvalidArgument("generate_pairs: fewer than two classes; no dissimilar pairs");
  }

  std::mt19937_64 rng(seed);
  PairSets out;
  out.similar.reserve(static_cast<std::size_t>(count_s));
  out.dissimilar.reserve(static_cast<std::size_t>(count_d));

  // Class chosen with probability proportional to its number of pairs, then a
  // uniform pair inside it: uniform over all same-class pairs.
  std::discrete_distribution<int> pick_class(weights.begin(), weights.end());
  for (int k = 0; k < count_s; ++k) {
    const auto& m = members[static_cast<std::size_t>(eligible[static_cast<std::size_t>(pick_class(rng))])];
    std::uniform_int_distribution<int> first(0, static_cast<int>(m.size()) - 1);
    std::uniform_int_distribution<int> second(0, static_cast<int>(m.size()) - 2);
    const int a = first(rng);
    int b = second(rng);
    if (b >= a) ++b;
    const int i = m[static_cast<std::size_t>(a)];
    const int j = m[static_cast<std::size_t>(b)];
    out.similar.emplace_back(std::min(i, j), std::max(i, j));
  }

  // Rejection from uniform ordered pairs is uniform over cross-class pairs.
  const int n = static_cast<int>(labels.size());
  std::uniform_int_distribution<int> any(0, n - 1);
  while (static_cast<int>(out.dissimilar.size()) < count_d) {
    const int i = any(rng);
    const int j = any(rng);
    if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
    out.dissimilar.emplace_back(std::min(i, j), std::max(i, j));
  }
  return out;
}

TrainResult train_lrgmml(const Dataset& train, const PairSets& pairs, int r,
                         double t, const SolverOptions& solver,
                         std::uint64_t seed) {
  if (r < 1 || r > train.d()) {
    throw InvalidArgument("train_lrgmml: rank " + std::to_string(r) +
                          " outside [1, " + std::to_string(train.d()) + "]");
  }
  auto sc_s = std::make_shared<const PairScatter>(build_scatter(train.features, pairs.similar));
  auto sc_d = std::make_shared<const PairScatter>(build_scatter(train.features, pairs.dissimilar));
  const Problem problem = make_problem(sc_s, sc_d, t, r);
  const StiefelPoint u0 = initial_subspace(*sc_d, r, seed);
  SolverResult result = minimize(problem, u0, solver);
  SpdMatrix b = inner_solution(project_scatter(*sc_s, result.point),
                               project_scatter(*sc_d, result.point), t);
  return {MetricModel{std::move(result.point), std::move(b), t},
          std::move(result.trace)};
}

MetricModel train_gmml(const Dataset& train, const PairSets& pairs, double t) {
  const PairScatter sc_s = build_scatter(train.features, pairs.similar);
  const PairScatter sc_d = build_scatter(train.features, pairs.dissimilar);
  SpdMatrix a = gmml_closed_form(sc_s, sc_d, t, train.d());
  return MetricModel{StiefelPoint::checked(Eigen::MatrixXd::Identity(train.d(), train.d())),
                     std::move(a), t};
}

MetricModel identity_model(int d) {
  return MetricModel{StiefelPoint::checked(Eigen::MatrixXd::Identity(d, d)),
                     SpdMatrix::identity(d), std::numeric_limits<double>::quiet_NaN()};
}

Eigen::MatrixXd embed(const MetricModel& model, const Eigen::MatrixXd& points) {
  if (points.cols() != model.d()) {
    throw InvalidArgument("embed: points have " + std::to_string(points.cols()) +
                          " features, model expects " + std::to_string(model.d()));
  }
  const SpdMatrix b_half = spd_power(model.b, 0.5);
  return (points * model.u.matrix()) * b_half.matrix();
}

double knn_error(const Eigen::MatrixXd& train_embedded,
                 std::span<const int> train_labels,
                 const Eigen::MatrixXd& test_embedded,
                 std::span<const int> test_labels, int k) {
  const int n_train = static_cast<int>(train_embedded.rows());
  const int n_test = static_cast<int>(test_embedded.rows());
  if (n_test == 0) throw InvalidArgument("knn_error: empty test set");
  if (k < 1 || k > n_train) {
    throw InvalidArgument("knn_error: k=" + std::to_string(k) + " with " +
                          std::to_string(n_train) + " training points");
  }
  if (static_cast<int>(train_labels.size()) != n_train ||
      static_cast<int>(test_labels.size()) != n_test) {
    throw InvalidArgument("knn_error: label count mismatch");
  }
  if (train_embedded.cols() != test_embedded.cols()) {
    throw InvalidArgument("knn_error: embedding dimension mismatch");
  }

  std::vector<int> order(static_cast<std::size_t>(n_train));
  std::vector<double> dist(static_cast<std::size_t>(n_train));
  int wrong = 0;
  for (int q = 0; q < n_test; ++q) {
    for (int i = 0; i < n_train; ++i) {
      dist[static_cast<std::size_t>(i)] =
          (train_embedded.row(i) - test_embedded.row(q)).norm();
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        const double da = dist[static_cast<std::size_t>(a)];
                        const double db = dist[static_cast<std::size_t>(b)];
                        return da < db || (da == db && a < b);
                      });
    // label -> (votes, summed distance)
    std::map<int, std::pair<int, double>> tally;
    for (int m = 0; m < k; ++m) {
      const int i = order[static_cast<std::size_t>(m)];
      auto& entry = tally[train_labels[static_cast<std::size_t>(i)]];
      ++entry.first;
      entry.second += dist[static_cast<std::size_t>(i)];
    }
    int best_label = tally.begin()->first;
    std::pair<int, double> best = tally.begin()->second;
    for (const auto& [label, score] : tally) {
      if (score.first > best.first ||
          (score.first == best.first && score.second < best.second)) {
        best_label = label;
        best = score;
      }
    }
    if (best_label != test_labels[static_cast<std::size_t>(q)]) ++wrong;
  }
  return static_cast<double>(wrong) / n_test;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  const double denom = std::max<Eigen::Index>(1, x.rows() - 1);
  s.scale = (centered.array().square().colwise().sum() / denom).sqrt().matrix();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw InvalidArgument("Standardizer: feature count mismatch");
  }
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

Split stratified_split(std::span<const int> labels, double train_fraction,
                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  auto members = members_by_class(labels);
  std::mt19937_64 rng(seed);
  Split split;
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng);
    const int nk = static_cast<int>(m.size());
    int n_train = nk;
    if (nk >= 3) {
      n_train = static_cast<int>(std::lround(train_fraction * nk));
      n_train = std::clamp(n_train, 2, nk - 1);
    }
    for (int i = 0; i < nk; ++i) {
      (i < n_train ? split.train : split.test).push_back(m[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

const char* to_string(Method method) {
  switch (method) {
    case Method::kLrgmml:
      return "lrgmml";
    case Method::kGmml:
      return "gmml";
    case Method::kEuclidean:
      return "euclidean";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "lrgmml") return Method::kLrgmml;
  if (name == "gmml") return Method::kGmml;
  if (name == "euclidean") return Method::kEuclidean;
  throw InvalidArgument("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (rank_list.empty()) throw InvalidArgument("rank_list is empty");
  if (t_grid.empty()) throw InvalidArgument("t_grid is empty");
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("t_grid values must lie in (0, 1)");
  }
  for (int r : rank_list) {
    if (r < 1) throw InvalidArgument("ranks must be >= 1");
  }
  if (k_neighbors < 1) throw InvalidArgument("k_neighbors must be >= 1");
  if (num_runs < 1) throw InvalidArgument("num_runs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  if (pairs_per_class_pair < 1) throw InvalidArgument("pairs_per_class_pair must be >= 1");
  solver.validate();
}

std::uint64_t cell_seed(std::uint64_t seed, int run, int rank, int t_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run),
                    static_cast<std::uint32_t>(rank),
                    static_cast<std::uint32_t>(t_index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

TSelection select_t(const Dataset& train, int rank, std::span<const double> t_grid,
                    int k, int pairs_per_class_pair, const SolverOptions& solver,
                    std::uint64_t seed) {
  if (t_grid.empty()) throw InvalidArgument("select_t: empty t grid");
  const Split inner = stratified_split(train.labels, 0.8, seed);
  const Dataset fit = train.subset(inner.train);
  const Dataset val = train.subset(inner.test);
  if (val.n() == 0) throw InvalidArgument("select_t: inner validation split is empty");
  const PairCounts counts = default_pair_counts(fit.labels, pairs_per_class_pair);
  const PairSets pairs = generate_pairs(fit.labels, std::max(1, counts.similar),
                                        std::max(1, counts.dissimilar), seed);
  TSelection best;
  bool any = false;
  for (double t : t_grid) {
    double err = 0.0;
    try {
      const MetricModel model =
          rank > 0 ? train_lrgmml(fit, pairs, std::min(rank, fit.d()), t, solver, seed).model
                   : train_gmml(fit, pairs, t);
      err = evaluate_model(model, fit, val, k);
    } catch (const NumericalError&) {
      continue;
    }
    if (!any || err < best.validation_error) {
      best = {t, err};
      any = true;
    }
  }
  if (!any) throw NumericalError("select_t: training failed for every t in the grid");
  return best;
}

namespace {

// Pairs index rows of the training subset; map them back and make sure none
// lands on a test row.
void check_split_hygiene(const Split& split, const PairSets& pairs) {
  std::vector<int> test = split.test;
  std::sort(test.begin(), test.end());
  const int n_train = static_cast<int>(split.train.size());
  auto bad = [&](int local) {
    if (local < 0 || local >= n_train) return true;
    return std::binary_search(test.begin(), test.end(), split.train[local]);
  };
  for (const auto* set : {&pairs.similar, &pairs.dissimilar}) {
    for (const auto& [i, j] : *set) {
      if (bad(i) || bad(j)) {
        throw std::logic_error("training pair touches a test row");
      }
    }
  }
}

}  // namespace

std::vector<ResultRecord> run_experiment(const Dataset& data,
                                         const ExperimentConfig& cfg) {
  cfg.validate();
  data.validate();
  using Clock = std::chrono::steady_clock;
  std::vector<ResultRecord> records;

  for (int run = 0; run < cfg.num_runs; ++run) {
    const Split split = stratified_split(data.labels, cfg.train_fraction,
                                         cell_seed(cfg.seed, run, -1, -1));
    Dataset train = data.subset(split.train);
    Dataset test = data.subset(split.test);
    const Standardizer standardizer = Standardizer::fit(train.features);
    train.features = standardizer.apply(train.features);
    test.features = standardizer.apply(test.features);

    const PairCounts counts = default_pair_counts(train.labels, cfg.pairs_per_class_pair);
    const PairSets pairs = generate_pairs(train.labels, std::max(1, counts.similar),
                                          std::max(1, counts.dissimilar),
                                          cell_seed(cfg.seed, run, 0, -2));
    check_split_hygiene(split, pairs);
    // Shared by every method so that t selection sees the same inner split.
    const std::uint64_t select_seed = cell_seed(cfg.seed, run, 0, -3);

    auto make_record = [&](Method method, int rank) {
      ResultRecord rec;
      rec.dataset = data.name;
      rec.method = method;
      rec.rank = rank;
      rec.run = run;
      rec.t = std::numeric_limits<double>::quiet_NaN();
      return rec;
    };

    if (cfg.include_euclidean) {
      ResultRecord rec = make_record(Method::kEuclidean, data.d());
      const auto start = Clock::now();
      rec.error = evaluate_model(identity_model(data.d()), train, test, cfg.k_neighbors);
      rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      records.push_back(std::move(rec));
    }

    if (cfg.include_gmml && data.d() <= kMaxExplicitDim) {
      ResultRecord rec = make_record(Method::kGmml, data.d());
      try {
        const TSelection sel = select_t(train, 0, cfg.t_grid, cfg.k_neighbors,
                                        cfg.pairs_per_class_pair, cfg.solver, select_seed);
        rec.t = sel.t;
        const auto start = Clock::now();
        const MetricModel model = train_gmml(train, pairs, sel.t);
        rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        rec.error = evaluate_model(model, train, test, cfg.k_neighbors);
      } catch (const Error& e) {
        rec.failure = e.what();
        rec.error = std::numeric_limits<double>::quiet_NaN();
      }
      records.push_back(std::move(rec));
    }

    for (int rank : cfg.rank_list) {
      ResultRecord rec = make_record(Method::kLrgmml, rank);
      try {
        if (rank > data.d()) {
          throw InvalidArgument("rank " + std::to_string(rank) + " exceeds d=" +
                                std::to_string(data.d()));
        }
        const TSelection sel = select_t(train, rank, cfg.t_grid, cfg.k_neighbors,
                                        cfg.pairs_per_class_pair, cfg.solver, select_seed);
        rec.t = sel.t;
        const auto start = Clock::now();
        const TrainResult trained = train_lrgmml(train, pairs, rank, sel.t, cfg.solver,
                                                 cell_seed(cfg.seed, run, rank, 0));
        rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        rec.iterations = trained.trace.iterations();
        rec.error = evaluate_model(trained.model, train, test, cfg.k_neighbors);
      } catch (const Error& e) {
        rec.failure = e.what();
        rec.error = std::numeric_limits<double>::quiet_NaN();
      }
      records.push_back(std::move(rec));
    }
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const ResultRecord& a, const ResultRecord& b) {
                     const double ta = std::isnan(a.t) ? -1.0 : a.t;
                     const double tb = std::isnan(b.t) ? -1.0 : b.t;
                     return std::tie(a.run, a.rank, a.method, ta) <
                            std::tie(b.run, b.rank, b.method, tb);
                   });
  return records;
}

}  // namespace lrgmml
