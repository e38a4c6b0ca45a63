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

// Riemannian conjugate gradients on Grass(r, d) with Armijo backtracking.

#ifndef LRGMML_RCG_SOLVER_H_
#define LRGMML_RCG_SOLVER_H_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrgmml/grassmann.h"

namespace lrgmml {

// Cost and Euclidean gradient of a function that depends on U only through
// its column space. Both callbacks must be deterministic.
struct Problem {
  std::function<double(const StiefelPoint&)> cost;
  std::function<Eigen::MatrixXd(const StiefelPoint&)> euclidean_grad;
  int d = 0;
  int r = 0;
};

enum class BetaRule {
  kHestenesStiefel,
  kPolakRibiere,
  kSteepestDescent,  // beta = 0; isolates line-search behaviour in tests
};

struct SolverOptions {
  int max_iters = 200;
  double grad_tol = 1e-6;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_line_search = 30;
  double initial_step = 1.0;
  BetaRule beta_rule = BetaRule::kHestenesStiefel;

  // Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

enum class TerminationReason { kGradTol, kMaxIters, kLineSearchFailure };

const char* to_string(TerminationReason reason);

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;     // step accepted to reach this iterate (0 at iter 0)
  int ls_evals = 0;      // cost evaluations spent by that line search
  double slope = 0.0;    // <grad, dir> at the previous iterate for that search
  bool restarted = false;  // search direction at this iterate reset to -grad
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  TerminationReason termination = TerminationReason::kMaxIters;
  std::string diagnostic;  // set for kLineSearchFailure

  int iterations() const {
    return records.empty() ? 0 : records.back().iter;
  }
  // CSV with header iter,cost,grad_norm,step,ls_evals,restarted.
  void write_csv(std::ostream& out) const;
};

struct SolverResult {
  StiefelPoint point;
  SolverTrace trace;
};

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  StiefelPoint next;
  double f_next = 0.0;
  int evals = 0;
};

// Backtracks from `trial_step` until f(R(u, step dir)) <= f0 + c1 step slope.
// Requires slope < 0.
LineSearchResult line_search_armijo(const Problem& problem, const StiefelPoint& u,
                                    const TangentVector& dir, double f0,
                                    double slope, double trial_step,
                                    const SolverOptions& opts);

SolverResult minimize(const Problem& problem, const StiefelPoint& u0,
                      const SolverOptions& opts = {});

}  // namespace lrgmml

#endif  // LRGMML_RCG_SOLVER_H_
