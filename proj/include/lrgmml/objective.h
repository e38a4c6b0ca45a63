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

// The low-rank geometric mean metric learning objective.
//
// Similar and dissimilar pairs are stored as stacked difference rows, so the
// scatter S = sum (x_i - x_j)(x_i - x_j)^T is never formed: U^T S U is
// computed as (diffs U)^T (diffs U) and S U as diffs^T (diffs U). For a subspace
// U the inner SPD factor B has the closed form
//
//   B = S~^{-1/2} (S~^{1/2} D~ S~^{1/2})^t S~^{-1/2},  S~ = U^T S U, D~ = U^T D U,
//
// and the outer cost is (1 - t) dist^2(B, S~^{-1}) + t dist^2(B, D~) with the
// affine-invariant distance on SPD matrices.

#ifndef LRGMML_OBJECTIVE_H_
#define LRGMML_OBJECTIVE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "lrgmml/grassmann.h"
#include "lrgmml/rcg_solver.h"
#include "lrgmml/spd.h"

namespace lrgmml {

using IndexPair = std::pair<int, int>;

// Largest d for which explicit d x d scatters are ever materialized.
inline constexpr int kMaxExplicitDim = 4096;

// Projected scatters must keep at least this fraction of the full trace.
inline constexpr double kMinProjectedTraceFraction = 1e-8;

// The true derivative of cost() with respect to U is kEgradScale * egrad().
// The factor comes from the two symmetric occurrences of U in U^T S U and from
// the square in the distance; the gradient-check harness measures it.
inline constexpr double kEgradScale = 4.0;

class PairScatter {
 public:
  PairScatter() = default;
  explicit PairScatter(Eigen::MatrixXd diffs);

  int n_pairs() const { return static_cast<int>(diffs_.rows()); }
  int d() const { return static_cast<int>(diffs_.cols()); }
  const Eigen::MatrixXd& diffs() const { return diffs_; }
  // trace(S) = ||diffs||_F^2.
  double trace() const { return trace_; }

  // diffs * v  (n_pairs x k).
  Eigen::MatrixXd project(const Eigen::MatrixXd& v) const { return diffs_ * v; }
  // S v computed as diffs^T (diffs v).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& v) const;

  struct Streamed {
    Eigen::MatrixXd gram;     // v^T S v
    Eigen::MatrixXd applied;  // S v
  };
  // Both products from a single pass over the difference rows.
  Streamed stream(const Eigen::MatrixXd& v) const;
  // Explicit d x d scatter. Only for d <= kMaxExplicitDim.
  Eigen::MatrixXd explicit_matrix() const;

 private:
  Eigen::MatrixXd diffs_;
  double trace_ = 0.0;
};

// Row k of the result is points[i_k] - points[j_k].
PairScatter build_scatter(const Eigen::MatrixXd& points,
                          std::span<const IndexPair> pairs);

// U^T S U, floored to SPD. Throws NumericalError when the projection keeps
// less than kMinProjectedTraceFraction of trace(S).
SpdMatrix project_scatter(const PairScatter& sc, const StiefelPoint& u);

struct MetricModel {
  StiefelPoint u;
  SpdMatrix b;
  double t = 0.5;

  int d() const { return u.d(); }
  int r() const { return u.r(); }
  // A = U B U^T. Only for d <= kMaxExplicitDim.
  Eigen::MatrixXd metric() const;
};

// Weighted geometric mean of S~^{-1} and D~ at parameter t.
SpdMatrix inner_solution(const SpdMatrix& s_tilde, const SpdMatrix& d_tilde,
                         double t);

// (1 - t) dist^2(b, s_tilde^{-1}) + t dist^2(b, d_tilde) for an arbitrary b.
double inner_cost(const SpdMatrix& b, const SpdMatrix& s_tilde,
                  const SpdMatrix& d_tilde, double t);

// trace(b s_tilde) + trace(b^{-1} d_tilde).
double inner_trace_cost(const SpdMatrix& b, const SpdMatrix& s_tilde,
                        const SpdMatrix& d_tilde);

// Inner-minimized cost at subspace u.
double cost(const StiefelPoint& u, const PairScatter& sc_s,
            const PairScatter& sc_d, double t);

// trace(A S) + trace(A^+ D) with A = U B U^T, A^+ = U B^{-1} U^T, evaluated
// in the r-dimensional space.
double trace_cost(const MetricModel& model, const PairScatter& sc_s,
                  const PairScatter& sc_d);

// Partial derivative of cost() with respect to U, in the closed form
//   (1-t) S U S~^{-1/2} logm(S~^{1/2} B S~^{1/2}) S~^{-1/2}
//     - t D U D~^{-1/2} logm(D~^{-1/2} B D~^{-1/2}) D~^{-1/2}.
// Off from the true derivative by the constant kEgradScale.
Eigen::MatrixXd egrad(const StiefelPoint& u, const PairScatter& sc_s,
                      const PairScatter& sc_d, double t);

// Full-rank closed form A = S^{-1/2} (S^{1/2} D S^{1/2})^t S^{-1/2} on explicit
// scatters. Throws InvalidArgument for d > kMaxExplicitDim.
SpdMatrix gmml_closed_form(const PairScatter& sc_s, const PairScatter& sc_d,
                           double t, int d);

// (1 - t) dist^2(a, S^{-1}) + t dist^2(a, D) for a full-rank d x d metric.
double full_rank_cost(const SpdMatrix& a, const PairScatter& sc_s,
                      const PairScatter& sc_d, double t);

// Top-r eigenvectors of the implicit scatter by block subspace iteration;
// deterministic for a fixed seed. Never forms a d x d matrix.
StiefelPoint initial_subspace(const PairScatter& sc, int r, std::uint64_t seed);

struct ObjectiveStats {
  std::size_t projections = 0;  // evaluations of S~, D~, B
  std::size_t cache_hits = 0;
};

// Cost and kEgradScale * egrad packaged for minimize(). Cost and gradient at
// the same point share one projected-scatter computation.
Problem make_problem(std::shared_ptr<const PairScatter> sc_s,
                     std::shared_ptr<const PairScatter> sc_d, double t, int r,
                     std::shared_ptr<ObjectiveStats> stats = nullptr);

}  // namespace lrgmml

#endif  // LRGMML_OBJECTIVE_H_
