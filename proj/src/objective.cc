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

#include "lrgmml/objective.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

void require_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("t must lie in [0, 1], got " + std::to_string(t));
  }
}

void require_compatible(const StiefelPoint& u, const PairScatter& sc_s,
                        const PairScatter& sc_d) {
  if (sc_s.d() != u.d() || sc_d.d() != u.d()) {
    throw InvalidArgument("scatter dimension (" + std::to_string(sc_s.d()) + ", " +
                          std::to_string(sc_d.d()) +
                          ") does not match subspace dimension " +
                          std::to_string(u.d()));
  }
}

// Everything the cost and gradient need at one subspace.
struct PointState {
  Eigen::MatrixXd s_applied;  // S U
  Eigen::MatrixXd d_applied;  // D U
  SpdMatrix s_tilde;
  SpdMatrix d_tilde;
  SpdMatrix b;
};

SpdMatrix projected(const Eigen::MatrixXd& gram, const PairScatter& sc,
                    const char* role) {
  if (!gram.allFinite()) {
    throw NumericalError(std::string("non-finite projected ") + role + " scatter");
  }
  if (!(gram.trace() >= kMinProjectedTraceFraction * sc.trace()) ||
      !(sc.trace() > 0.0)) {
    throw NumericalError(
        std::string("projected ") + role +
        " scatter is numerically zero (all pairs orthogonal to the subspace); "
        "use more pairs or a smaller rank");
  }
  return SpdMatrix::floored(SymMatrix(gram), kRelativeEigFloor, role);
}

PointState evaluate(const StiefelPoint& u, const PairScatter& sc_s,
                    const PairScatter& sc_d, double t) {
  PairScatter::Streamed s = sc_s.stream(u.matrix());
  PairScatter::Streamed d = sc_d.stream(u.matrix());
  SpdMatrix s_tilde = projected(s.gram, sc_s, "similar");
  SpdMatrix d_tilde = projected(d.gram, sc_d, "dissimilar");
  SpdMatrix b = inner_solution(s_tilde, d_tilde, t);
  return PointState{std::move(s.applied), std::move(d.applied), std::move(s_tilde),
                    std::move(d_tilde), std::move(b)};
}

double cost_at(const PointState& st, double t) {
  return inner_cost(st.b, st.s_tilde, st.d_tilde, t);
}

Eigen::MatrixXd egrad_at(const PointState& st, double t) {
  const SpdMatrix s_half = spd_power(st.s_tilde, 0.5);
  const SpdMatrix s_inv_half = spd_power(st.s_tilde, -0.5);
  const SpdMatrix d_inv_half = spd_power(st.d_tilde, -0.5);
  const Eigen::MatrixXd& b = st.b.matrix();

  const SymMatrix log_s = spd_logm(SpdMatrix::floored(
      SymMatrix(s_half.matrix() * b * s_half.matrix()), kRelativeEigFloor,
      "S~^{1/2} B S~^{1/2}"));
  const SymMatrix log_d = spd_logm(SpdMatrix::floored(
      SymMatrix(d_inv_half.matrix() * b * d_inv_half.matrix()),
      kRelativeEigFloor, "D~^{-1/2} B D~^{-1/2}"));

  const Eigen::MatrixXd core_s =
      (1.0 - t) * s_inv_half.matrix() * log_s.matrix() * s_inv_half.matrix();
  const Eigen::MatrixXd core_d =
      t * d_inv_half.matrix() * log_d.matrix() * d_inv_half.matrix();

  Eigen::MatrixXd grad = st.s_applied * core_s;
  grad.noalias() -= st.d_applied * core_d;
  return grad;
}

}  // namespace

PairScatter::PairScatter(Eigen::MatrixXd diffs) : diffs_(std::move(diffs)) {
  if (diffs_.rows() == 0) {
    throw InvalidArgument("a scatter needs at least one pair");
  }
  if (!diffs_.allFinite()) {
    throw NumericalError("non-finite pair difference");
  }
  trace_ = diffs_.squaredNorm();
}

Eigen::MatrixXd PairScatter::apply(const Eigen::MatrixXd& v) const {
  return diffs_.transpose() * (diffs_ * v);
}

PairScatter::Streamed PairScatter::stream(const Eigen::MatrixXd& v) const {
  // Row blocks small enough to stay cache-resident between the two products.
  constexpr Eigen::Index rows = 256;
  Streamed out{Eigen::MatrixXd::Zero(v.cols(), v.cols()),
               Eigen::MatrixXd::Zero(diffs_.cols(), v.cols())};
  Eigen::MatrixXd block_proj;
  for (Eigen::Index i = 0; i < diffs_.rows(); i += rows) {
    const Eigen::Index b = std::min(rows, diffs_.rows() - i);
    const auto block = diffs_.middleRows(i, b);
    block_proj.noalias() = block * v;
    out.gram.noalias() += block_proj.transpose() * block_proj;
    out.applied.noalias() += block.transpose() * block_proj;
  }
  return out;
}

Eigen::MatrixXd PairScatter::explicit_matrix() const {
  if (d() > kMaxExplicitDim) {
    throw InvalidArgument("refusing to materialize a " + std::to_string(d()) +
                          "x" + std::to_string(d()) + " scatter");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d(), d());
  s.selfadjointView<Eigen::Lower>().rankUpdate(diffs_.transpose());
  return s.selfadjointView<Eigen::Lower>();
}

PairScatter build_scatter(const Eigen::MatrixXd& points,
                          std::span<const IndexPair> pairs) {
  if (pairs.empty()) {
    throw InvalidArgument("build_scatter: empty pair list");
  }
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd diffs(static_cast<Eigen::Index>(pairs.size()), points.cols());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw InvalidArgument("build_scatter: pair (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") out of range for " +
                            std::to_string(n) + " points");
    }
    diffs.row(static_cast<Eigen::Index>(k)) = points.row(i) - points.row(j);
  }
  return PairScatter(std::move(diffs));
}

SpdMatrix project_scatter(const PairScatter& sc, const StiefelPoint& u) {
  if (sc.d() != u.d()) {
    throw InvalidArgument("project_scatter: scatter has d=" + std::to_string(sc.d()) +
                          ", subspace has d=" + std::to_string(u.d()));
  }
  return projected(sc.stream(u.matrix()).gram, sc, "scatter");
}

Eigen::MatrixXd MetricModel::metric() const {
  if (d() > kMaxExplicitDim) {
    throw InvalidArgument("refusing to materialize a " + std::to_string(d()) +
                          "x" + std::to_string(d()) + " metric");
  }
  return u.matrix() * b.matrix() * u.matrix().transpose();
}

SpdMatrix inner_solution(const SpdMatrix& s_tilde, const SpdMatrix& d_tilde,
                         double t) {
  require_t(t);
  return weighted_geometric_mean(spd_power(s_tilde, -1.0), d_tilde, t);
}

double inner_cost(const SpdMatrix& b, const SpdMatrix& s_tilde,
                  const SpdMatrix& d_tilde, double t) {
  require_t(t);
  return (1.0 - t) * riemannian_distance_sq(b, spd_power(s_tilde, -1.0)) +
         t * riemannian_distance_sq(b, d_tilde);
}

double inner_trace_cost(const SpdMatrix& b, const SpdMatrix& s_tilde,
                        const SpdMatrix& d_tilde) {
  const SpdMatrix b_inv = spd_power(b, -1.0);
  return (b.matrix().array() * s_tilde.matrix().array()).sum() +
         (b_inv.matrix().array() * d_tilde.matrix().array()).sum();
}

double cost(const StiefelPoint& u, const PairScatter& sc_s,
            const PairScatter& sc_d, double t) {
  require_t(t);
  require_compatible(u, sc_s, sc_d);
  return cost_at(evaluate(u, sc_s, sc_d, t), t);
}

double trace_cost(const MetricModel& model, const PairScatter& sc_s,
                  const PairScatter& sc_d) {
  require_compatible(model.u, sc_s, sc_d);
  if (model.b.dim() != model.r()) {
    throw InvalidArgument("trace_cost: B is not r x r");
  }
  return inner_trace_cost(model.b, project_scatter(sc_s, model.u),
                          project_scatter(sc_d, model.u));
}

Eigen::MatrixXd egrad(const StiefelPoint& u, const PairScatter& sc_s,
                      const PairScatter& sc_d, double t) {
  require_t(t);
  require_compatible(u, sc_s, sc_d);
  return egrad_at(evaluate(u, sc_s, sc_d, t), t);
}

SpdMatrix gmml_closed_form(const PairScatter& sc_s, const PairScatter& sc_d,
                           double t, int d) {
  require_t(t);
  if (d > kMaxExplicitDim) {
    throw InvalidArgument("full-rank GMML needs explicit " + std::to_string(d) +
                          "x" + std::to_string(d) +
                          " scatters; use the low-rank solver for d > " +
                          std::to_string(kMaxExplicitDim));
  }
  if (sc_s.d() != d || sc_d.d() != d) {
    throw InvalidArgument("gmml_closed_form: scatter dimension does not match d");
  }
  const SpdMatrix s = SpdMatrix::floored(SymMatrix(sc_s.explicit_matrix()),
                                         kRelativeEigFloor, "similar scatter");
  const SpdMatrix dd = SpdMatrix::floored(SymMatrix(sc_d.explicit_matrix()),
                                          kRelativeEigFloor, "dissimilar scatter");
  return weighted_geometric_mean(spd_power(s, -1.0), dd, t);
}

double full_rank_cost(const SpdMatrix& a, const PairScatter& sc_s,
                      const PairScatter& sc_d, double t) {
  require_t(t);
  if (sc_s.d() != a.dim() || sc_d.d() != a.dim()) {
    throw InvalidArgument("full_rank_cost: dimension mismatch");
  }
  const SpdMatrix s = SpdMatrix::floored(SymMatrix(sc_s.explicit_matrix()),
                                         kRelativeEigFloor, "similar scatter");
  const SpdMatrix dd = SpdMatrix::floored(SymMatrix(sc_d.explicit_matrix()),
                                          kRelativeEigFloor, "dissimilar scatter");
  return inner_cost(a, s, dd, t);
}

StiefelPoint initial_subspace(const PairScatter& sc, int r, std::uint64_t seed) {
  const int d = sc.d();
  if (r < 1 || r > d) {
    throw InvalidArgument("initial_subspace: need 1 <= r <= d");
  }
  constexpr int kIterations = 15;
  const int block = r + std::min(10, d - r);
  // A small shift keeps the iterates full rank when the scatter has rank < r;
  // it leaves the eigenvectors unchanged.
  const double shift = 1e-8 * sc.trace() / d;
  Eigen::MatrixXd q = random_point(d, block, seed).matrix();
  for (int it = 0; it < kIterations; ++it) {
    Eigen::MatrixXd z = sc.apply(q);
    z += shift * q;
    q = StiefelPoint::orthonormalize(z).matrix();
  }
  // Rayleigh-Ritz on the block.
  const Eigen::MatrixXd sq = sc.apply(q);
  const EigenPair ritz = sym_eig(SymMatrix(q.transpose() * sq), "Ritz matrix");
  return StiefelPoint::orthonormalize(q * ritz.eigenvectors.leftCols(r));
}

Problem make_problem(std::shared_ptr<const PairScatter> sc_s,
                     std::shared_ptr<const PairScatter> sc_d, double t, int r,
                     std::shared_ptr<ObjectiveStats> stats) {
  require_t(t);
  if (!sc_s || !sc_d) throw InvalidArgument("make_problem: null scatter");
  if (sc_s->d() != sc_d->d()) {
    throw InvalidArgument("make_problem: similar and dissimilar scatters differ in d");
  }
  if (r < 1 || r > sc_s->d()) {
    throw InvalidArgument("make_problem: need 1 <= r <= d");
  }
  if (!stats) stats = std::make_shared<ObjectiveStats>();

  struct Cache {
    Eigen::MatrixXd key;
    std::unique_ptr<PointState> state;
  };
  auto cache = std::make_shared<Cache>();
  auto state_at = [sc_s, sc_d, t, stats, cache](const StiefelPoint& u) -> const PointState& {
    if (cache->state && cache->key.rows() == u.matrix().rows() &&
        cache->key.cols() == u.matrix().cols() && cache->key == u.matrix()) {
      ++stats->cache_hits;
      return *cache->state;
    }
    require_compatible(u, *sc_s, *sc_d);
    auto fresh = std::make_unique<PointState>(evaluate(u, *sc_s, *sc_d, t));
    ++stats->projections;
    cache->key = u.matrix();
    cache->state = std::move(fresh);
    return *cache->state;
  };

  Problem problem;
  problem.d = sc_s->d();
  problem.r = r;
  problem.cost = [state_at, t](const StiefelPoint& u) {
    return cost_at(state_at(u), t);
  };
  problem.euclidean_grad = [state_at, sc_s, sc_d, t](const StiefelPoint& u) {
    Eigen::MatrixXd g = egrad_at(state_at(u), t);
    g *= kEgradScale;
    return g;
  };
  return problem;
}

}  // namespace lrgmml
