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

// Dataset loaders and the artifact's text file formats.

#ifndef LRGMML_IO_H_
#define LRGMML_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "lrgmml/pipeline.h"
#include "lrgmml/rcg_solver.h"

namespace lrgmml {

// Which CSV column holds the label: the last one, or a 0-based index.
struct LabelColumn {
  static constexpr int kLast = -1;
  int index = kLast;
};

// Comma-separated numeric features plus one label column. Labels are strings
// mapped to dense class ids in first-appearance order.
Dataset load_csv(const std::string& path, LabelColumn label_column = {},
                 bool has_header = false);
Dataset parse_csv(std::istream& in, const std::string& name,
                  LabelColumn label_column = {}, bool has_header = false);

// "label idx:val ..." with 1-based ascending indices; d is the largest index.
Dataset load_libsvm(const std::string& path);
Dataset parse_libsvm(std::istream& in, const std::string& name);

// Text model format:
//   LRGMML v1
//   <d> <r> <t>
//   d lines of r numbers (U), then r lines of r numbers (B)
// Numbers are written with 17 significant digits.
inline constexpr const char* kModelMagic = "LRGMML v1";

void write_model(std::ostream& out, const MetricModel& model);
MetricModel read_model(std::istream& in);
void save_model(const MetricModel& model, const std::string& path);
MetricModel load_model(const std::string& path);

// dataset,method,rank,t,run,error,seconds,iterations
void write_results(std::ostream& out, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results(std::istream& in);

struct PlotPoint {
  std::string dataset;
  Method method = Method::kLrgmml;
  int rank = 0;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation; 0 for one run
  int runs = 0;
};

// Mean and standard deviation of successful records per (dataset, method, rank).
std::vector<PlotPoint> summarize(const std::vector<ResultRecord>& records);
// dataset,method,rank,mean_error,std_error,runs
void write_plot_data(std::ostream& out, const std::vector<PlotPoint>& points);
std::vector<PlotPoint> read_plot_data(std::istream& in);

std::vector<IterationRecord> read_trace_csv(std::istream& in);

// JSON experiment configuration. Keys: rank_list, t_grid, k_neighbors,
// num_runs, train_fraction, pairs_per_class_pair, seed, include_gmml,
// include_euclidean, solver {max_iters, grad_tol, armijo_c1,
// backtrack_factor, max_line_search, initial_step, beta_rule}.
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// "%.17g".
std::string format_double(double value);

}  // namespace lrgmml

#endif  // LRGMML_IO_H_
