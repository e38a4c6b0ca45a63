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

#include "lrgmml/rcg_solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

TangentVector riemannian_grad(const Problem& problem, const StiefelPoint& u) {
  return project_tangent(u, problem.euclidean_grad(u));
}

TangentVector negated(const TangentVector& v) { return TangentVector{-v.xi}; }

}  // namespace

void SolverOptions::validate() const {
  if (max_iters < 0) throw InvalidArgument("max_iters must be >= 0");
  if (!(grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be >= 0");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) {
    throw InvalidArgument("armijo_c1 must lie in (0, 1)");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw InvalidArgument("backtrack_factor must lie in (0, 1)");
  }
  if (max_line_search < 1) throw InvalidArgument("max_line_search must be >= 1");
  if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
    throw InvalidArgument("initial_step must be positive and finite");
  }
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGradTol:
      return "GradTol";
    case TerminationReason::kMaxIters:
      return "MaxIters";
    case TerminationReason::kLineSearchFailure:
      return "LineSearchFailure";
  }
  return "Unknown";
}

void SolverTrace::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "iter,cost,grad_norm,step,ls_evals,restarted\n";
  for (const IterationRecord& rec : records) {
    out << rec.iter << ',' << rec.cost << ',' << rec.grad_norm << ','
        << rec.step << ',' << rec.ls_evals << ',' << (rec.restarted ? 1 : 0)
        << '\n';
  }
  out.precision(old_precision);
}

LineSearchResult line_search_armijo(const Problem& problem, const StiefelPoint& u,
                                    const TangentVector& dir, double f0,
                                    double slope, double trial_step,
                                    const SolverOptions& opts) {
  if (!(slope < 0.0)) {
    throw InvalidArgument("line_search_armijo: direction is not a descent direction");
  }
  LineSearchResult result;
  double step = trial_step;
  for (int k = 0; k < opts.max_line_search; ++k) {
    ++result.evals;
    // A candidate the objective cannot evaluate is rejected like one that
    // fails the decrease test.
    StiefelPoint candidate;
    double fc = 0.0;
    try {
      candidate = retract(u, dir, step);
      fc = problem.cost(candidate);
    } catch (const NumericalError&) {
      step *= opts.backtrack_factor;
      continue;
    }
    if (std::isfinite(fc) && fc <= f0 + opts.armijo_c1 * step * slope) {
      result.success = true;
      result.step = step;
      result.next = std::move(candidate);
      result.f_next = fc;
      return result;
    }
    step *= opts.backtrack_factor;
  }
  return result;
}

SolverResult minimize(const Problem& problem, const StiefelPoint& u0,
                      const SolverOptions& opts) {
  opts.validate();
  if (u0.d() != problem.d || u0.r() != problem.r) {
    throw InvalidArgument("minimize: initial point is " + std::to_string(u0.d()) +
                          "x" + std::to_string(u0.r()) + ", problem expects " +
                          std::to_string(problem.d) + "x" +
                          std::to_string(problem.r));
  }

  SolverResult out{u0, {}};
  SolverTrace& trace = out.trace;
  StiefelPoint& u = out.point;

  double f = problem.cost(u);
  if (!std::isfinite(f)) {
    throw NumericalError("minimize: non-finite cost at iterate 0");
  }
  TangentVector grad = riemannian_grad(problem, u);
  if (!grad.xi.allFinite()) {
    throw NumericalError("minimize: non-finite gradient at iterate 0");
  }
  double grad_norm = tangent_norm(grad);
  trace.records.push_back({0, f, grad_norm, 0.0, 0, 0.0, false});

  TangentVector dir = negated(grad);
  bool dir_is_steepest = true;
  double step_guess = opts.initial_step;
  bool first = true;

  for (int iter = 1;; ++iter) {
    if (grad_norm <= opts.grad_tol * std::max(1.0, std::abs(f))) {
      trace.termination = TerminationReason::kGradTol;
      return out;
    }
    if (iter > opts.max_iters) {
      trace.termination = TerminationReason::kMaxIters;
      return out;
    }

    const double trial =
        first ? opts.initial_step : std::min(2.0 * step_guess, opts.initial_step);
    first = false;
    double slope = tangent_inner(grad, dir);
    LineSearchResult ls =
        line_search_armijo(problem, u, dir, f, slope, trial, opts);
    int evals = ls.evals;
    bool restarted = false;
    if (!ls.success && !dir_is_steepest) {
      // One steepest-descent restart before giving up.
      dir = negated(grad);
      dir_is_steepest = true;
      restarted = true;
      slope = tangent_inner(grad, dir);
      ls = line_search_armijo(problem, u, dir, f, slope, opts.initial_step, opts);
      evals += ls.evals;
    }
    if (!ls.success) {
      trace.termination = TerminationReason::kLineSearchFailure;
      trace.diagnostic = "line search exhausted " +
                         std::to_string(opts.max_line_search) +
                         " backtracking steps at iterate " +
                         std::to_string(iter - 1);
      return out;
    }

    TangentVector next_grad = riemannian_grad(problem, ls.next);
    if (!next_grad.xi.allFinite()) {
      trace.termination = TerminationReason::kLineSearchFailure;
      trace.diagnostic = "non-finite gradient at iterate " + std::to_string(iter);
      return out;
    }

    const TangentVector grad_moved = transport(ls.next, grad);
    const TangentVector dir_moved = transport(ls.next, dir);
    const TangentVector grad_change{next_grad.xi - grad_moved.xi};
    double beta = 0.0;
    switch (opts.beta_rule) {
      case BetaRule::kHestenesStiefel:
        beta = tangent_inner(next_grad, grad_change) /
               tangent_inner(dir_moved, grad_change);
        break;
      case BetaRule::kPolakRibiere:
        beta = tangent_inner(next_grad, grad_change) / tangent_inner(grad, grad);
        break;
      case BetaRule::kSteepestDescent:
        beta = 0.0;
        break;
    }

    TangentVector next_dir{-next_grad.xi + beta * dir_moved.xi};
    dir_is_steepest = (beta == 0.0);
    if (!std::isfinite(beta) || beta < 0.0 ||
        !(tangent_inner(next_grad, next_dir) < 0.0)) {
      next_dir = negated(next_grad);
      dir_is_steepest = true;
      restarted = restarted || opts.beta_rule != BetaRule::kSteepestDescent;
    }

    u = std::move(ls.next);
    f = ls.f_next;
    grad = std::move(next_grad);
    grad_norm = tangent_norm(grad);
    dir = std::move(next_dir);
    step_guess = ls.step;
    trace.records.push_back({iter, f, grad_norm, ls.step, evals, slope, restarted});
  }
}

}  // namespace lrgmml
