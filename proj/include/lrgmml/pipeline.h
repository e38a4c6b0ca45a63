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

// Weakly supervised experiment pipeline: pair sampling, splits, training,
// embedding and k-NN evaluation.

#ifndef LRGMML_PIPELINE_H_
#define LRGMML_PIPELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrgmml/objective.h"
#include "lrgmml/rcg_solver.h"

namespace lrgmml {

struct Dataset {
  Eigen::MatrixXd features;         // n x d
  std::vector<int> labels;          // dense class ids
  std::vector<std::string> class_names;  // class id -> original label
  std::string name;

  int n() const { return static_cast<int>(features.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
  int num_classes() const;

  // Rows `idx` in the given order; keeps class ids and names.
  Dataset subset(std::span<const int> idx) const;
  // Throws on non-finite features or a label/row count mismatch.
  void validate() const;
};

struct PairSets {
  std::vector<IndexPair> similar;
  std::vector<IndexPair> dissimilar;
};

// Uniform draws with replacement from same-class (similar) and cross-class
// (dissimilar) index pairs, stored as (min, max). Classes with fewer than two
// samples are left out of similar sampling and reported in `warnings`.
PairSets generate_pairs(std::span<const int> labels, int count_s, int count_d,
                        std::uint64_t seed,
                        std::vector<std::string>* warnings = nullptr);

struct PairCounts {
  int similar = 0;
  int dissimilar = 0;
};

// per_class_pair * c * (c - 1), capped at the number of distinct pairs of
// each kind.
PairCounts default_pair_counts(std::span<const int> labels, int per_class_pair = 40);

struct TrainResult {
  MetricModel model;
  SolverTrace trace;
};

// Subspace initialized from the dissimilar scatter, then Riemannian CG.
TrainResult train_lrgmml(const Dataset& train, const PairSets& pairs, int r,
                         double t, const SolverOptions& solver,
                         std::uint64_t seed = 0);

// Full-rank closed form wrapped as a model with U = I.
MetricModel train_gmml(const Dataset& train, const PairSets& pairs, double t);

MetricModel identity_model(int d);

// Row i is B^{1/2} U^T x_i.
Eigen::MatrixXd embed(const MetricModel& model, const Eigen::MatrixXd& points);

// Majority vote among the k nearest rows (Euclidean). Vote ties go to the
// smaller summed distance, then the smaller class id; distance ties to the
// smaller training index.
double knn_error(const Eigen::MatrixXd& train_embedded,
                 std::span<const int> train_labels,
                 const Eigen::MatrixXd& test_embedded,
                 std::span<const int> test_labels, int k);

// Per-feature z-score from training statistics; zero-variance features keep
// unit scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

// Per-class shuffle; each class with >= 3 samples keeps >= 2 in train and
// >= 1 in test. Index lists are sorted.
Split stratified_split(std::span<const int> labels, double train_fraction,
                       std::uint64_t seed);

enum class Method { kLrgmml, kGmml, kEuclidean };

const char* to_string(Method method);
Method method_from_string(const std::string& name);

struct ExperimentConfig {
  std::vector<int> rank_list;
  std::vector<double> t_grid{0.1, 0.3, 0.5, 0.7, 0.9};
  int k_neighbors = 5;
  int num_runs = 5;
  double train_fraction = 0.7;
  int pairs_per_class_pair = 40;
  std::uint64_t seed = 0;
  SolverOptions solver;
  bool include_gmml = true;
  bool include_euclidean = true;

  void validate() const;
};

struct ResultRecord {
  std::string dataset;
  Method method = Method::kLrgmml;
  int rank = 0;
  double t = 0.0;  // NaN for the identity metric
  int run = 0;
  double error = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  std::string failure;  // non-empty when the cell failed

  bool ok() const { return failure.empty(); }
};

struct TSelection {
  double t = 0.5;
  double validation_error = 1.0;
};

// Picks t from `t_grid` by k-NN error on an inner 80/20 split of `train`.
// `rank` <= 0 selects t for the full-rank closed form.
TSelection select_t(const Dataset& train, int rank, std::span<const double> t_grid,
                    int k, int pairs_per_class_pair, const SolverOptions& solver,
                    std::uint64_t seed);

// Records ordered by (run, rank, method, t).
std::vector<ResultRecord> run_experiment(const Dataset& data,
                                         const ExperimentConfig& cfg);

// Deterministic 64-bit seed for one experiment cell.
std::uint64_t cell_seed(std::uint64_t seed, int run, int rank, int t_index);

}  // namespace lrgmml

#endif  // LRGMML_PIPELINE_H_
