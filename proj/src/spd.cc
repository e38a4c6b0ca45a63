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

#include "lrgmml/spd.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd reconstruct(const EigenPair& eig) {
  return symmetrized(eig.eigenvectors * eig.eigenvalues.asDiagonal() *
                     eig.eigenvectors.transpose());
}

// Re-sorts a spectrum descending after an elementwise map.
EigenPair sorted_descending(Eigen::VectorXd values, const Eigen::MatrixXd& vecs) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) > values(b);
  });
  EigenPair out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(vecs.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = values(order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument("SymMatrix requires a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
  m_ = symmetrized(m);
}

EigenPair sym_eig(const SymMatrix& m, std::string_view role) {
  if (!m.matrix().allFinite()) {
    throw NumericalError("non-finite entries in " + std::string(role));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed to converge on " +
                         std::string(role));
  }
  // Eigen returns ascending order.
  EigenPair out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

NumericalHealth& numerical_health() {
  thread_local NumericalHealth health;
  return health;
}

void reset_numerical_health() { numerical_health() = NumericalHealth{}; }

SpdMatrix SpdMatrix::from_spectrum(EigenPair eig, double rel_floor) {
  const double lambda_max = eig.eigenvalues(0);
  const double floor = rel_floor * lambda_max;
  bool clamped = false;
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    if (eig.eigenvalues(k) < floor) {
      eig.eigenvalues(k) = floor;
      clamped = true;
    }
  }
  if (clamped) ++numerical_health().clamp_events;
  Eigen::MatrixXd m = reconstruct(eig);
  return SpdMatrix(std::move(m), std::move(eig), floor);
}

SpdMatrix SpdMatrix::floored(const SymMatrix& m, double rel_floor,
                             std::string_view role) {
  EigenPair eig = sym_eig(m, role);
  const double lambda_max = eig.eigenvalues(0);
  if (!(lambda_max > 0.0)) {
    throw NumericalError(std::string(role) +
                         " has no positive eigenvalue; cannot floor to SPD");
  }
  const double floor = rel_floor * lambda_max;
  if (eig.eigenvalues(eig.eigenvalues.size() - 1) >= floor) {
    // Keep the caller's entries when no eigenvalue needed repair.
    return SpdMatrix(m.matrix(), std::move(eig), floor);
  }
  return from_spectrum(std::move(eig), rel_floor);
}

SpdMatrix SpdMatrix::validated(const Eigen::MatrixXd& m,
                               std::string_view role) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument(std::string(role) + " must be a non-empty square matrix");
  }
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-10 * std::max(1.0, m.norm())) {
    throw NumericalError(std::string(role) + " is not symmetric");
  }
  SymMatrix sym(m);
  EigenPair eig = sym_eig(sym, role);
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (!(lambda_min > 0.0) || lambda_min < kRelativeEigFloor * lambda_max) {
    throw NumericalError(std::string(role) +
                         " is not positive definite (smallest eigenvalue " +
                         std::to_string(lambda_min) + ")");
  }
  return SpdMatrix(sym.matrix(), std::move(eig), kRelativeEigFloor * lambda_max);
}

SpdMatrix SpdMatrix::identity(int dim) {
  return diagonal(Eigen::VectorXd::Ones(dim));
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& values) {
  return floored(SymMatrix(values.asDiagonal().toDenseMatrix()));
}

SpdMatrix spd_power(const SpdMatrix& m, double p) {
  if (p == 1.0) return m;
  const EigenPair& eig = m.eig();
  Eigen::VectorXd powered = eig.eigenvalues.array().pow(p).matrix();
  return SpdMatrix::from_spectrum(sorted_descending(std::move(powered), eig.eigenvectors),
                                  kRelativeEigFloor);
}

SymMatrix spd_logm(const SpdMatrix& m) {
  const EigenPair& eig = m.eig();
  const Eigen::VectorXd logs = eig.eigenvalues.array().log().matrix();
  return SymMatrix(eig.eigenvectors * logs.asDiagonal() * eig.eigenvectors.transpose());
}

SpdMatrix weighted_geometric_mean(const SpdMatrix& x, const SpdMatrix& y,
                                  double t) {
  if (x.dim() != y.dim()) {
    throw InvalidArgument("geometric mean of matrices with dimensions " +
                          std::to_string(x.dim()) + " and " +
                          std::to_string(y.dim()));
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("geometric mean weight t must lie in [0, 1]");
  }
  if (t == 0.0) return x;
  if (t == 1.0) return y;
  const SpdMatrix x_half = spd_power(x, 0.5);
  const SpdMatrix x_inv_half = spd_power(x, -0.5);
  const SpdMatrix inner = SpdMatrix::floored(
      SymMatrix(x_inv_half.matrix() * y.matrix() * x_inv_half.matrix()),
      kRelativeEigFloor, "geometric-mean core");
  const SpdMatrix inner_t = spd_power(inner, t);
  return SpdMatrix::floored(
      SymMatrix(x_half.matrix() * inner_t.matrix() * x_half.matrix()),
      kRelativeEigFloor, "geometric mean");
}

double riemannian_distance_sq(const SpdMatrix& x, const SpdMatrix& y) {
  if (x.dim() != y.dim()) {
    throw InvalidArgument("Riemannian distance between matrices with dimensions " +
                          std::to_string(x.dim()) + " and " +
                          std::to_string(y.dim()));
  }
  const SpdMatrix x_inv_half = spd_power(x, -0.5);
  const SpdMatrix core = SpdMatrix::floored(
      SymMatrix(x_inv_half.matrix() * y.matrix() * x_inv_half.matrix()),
      kRelativeEigFloor, "distance core");
  return core.eig().eigenvalues.array().log().square().sum();
}

}  // namespace lrgmml
