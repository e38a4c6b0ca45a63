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

#include "lrgmml/grassmann.h"

#include <cmath>
#include <random>
#include <string>

#include "lrgmml/errors.h"

namespace lrgmml {
namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

}  // namespace

StiefelPoint StiefelPoint::orthonormalize(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  const Eigen::Index r = m.cols();
  if (r == 0 || r > d) {
    throw InvalidArgument("orthonormalize: need 1 <= r <= d, got d=" +
                          std::to_string(d) + " r=" + std::to_string(r));
  }
  if (!m.allFinite()) {
    throw NumericalError("orthonormalize: non-finite entries");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  Eigen::VectorXd diag = packed.diagonal().head(r);
  const double scale = diag.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || diag.cwiseAbs().minCoeff() <= 1e-12 * scale) {
    throw NumericalError(
        "orthonormalize: columns are numerically rank deficient "
        "(step too large along a degenerate direction?)");
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    if (diag(k) < 0.0) q.col(k) = -q.col(k);
  }
  return StiefelPoint(std::move(q));
}

StiefelPoint StiefelPoint::checked(const Eigen::MatrixXd& m, double tol) {
  if (m.cols() == 0 || m.cols() > m.rows()) {
    throw InvalidArgument("StiefelPoint: need 1 <= r <= d");
  }
  const Eigen::MatrixXd gram = m.transpose() * m;
  const double err =
      (gram - Eigen::MatrixXd::Identity(m.cols(), m.cols())).norm();
  if (!(err <= tol)) {
    throw NumericalError("StiefelPoint: columns are not orthonormal (||U^T U - I||_F = " +
                         std::to_string(err) + ")");
  }
  return StiefelPoint(m);
}

StiefelPoint random_point(int d, int r, std::uint64_t seed) {
  if (r < 1 || r > d) {
    throw InvalidArgument("random_point: need 1 <= r <= d, got d=" +
                          std::to_string(d) + " r=" + std::to_string(r));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(d, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < d; ++i) m(i, j) = gauss(rng);
  }
  return StiefelPoint::orthonormalize(m);
}

TangentVector project_tangent(const StiefelPoint& p, const Eigen::MatrixXd& z) {
  require_same_shape(p.matrix(), z, "project_tangent");
  const Eigen::MatrixXd& u = p.matrix();
  Eigen::MatrixXd utz = u.transpose() * z;
  return TangentVector{z - u * utz};
}

StiefelPoint retract(const StiefelPoint& p, const TangentVector& xi,
                     double step) {
  require_same_shape(p.matrix(), xi.xi, "retract");
  if (step == 0.0) return p;
  return StiefelPoint::orthonormalize(p.matrix() + step * xi.xi);
}

TangentVector transport(const StiefelPoint& p_new, const TangentVector& xi) {
  return project_tangent(p_new, xi.xi);
}

double tangent_inner(const TangentVector& a, const TangentVector& b) {
  require_same_shape(a.xi, b.xi, "tangent_inner");
  return (a.xi.array() * b.xi.array()).sum();
}

double tangent_norm(const TangentVector& a) { return std::sqrt(tangent_inner(a, a)); }

}  // namespace lrgmml
