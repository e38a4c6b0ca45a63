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

// Grass(r, d) represented by d x r matrices with orthonormal columns. Only the
// column space is meaningful; every routine here depends on U through U U^T or
// through quantities that transform covariantly under U -> U O.

#ifndef LRGMML_GRASSMANN_H_
#define LRGMML_GRASSMANN_H_

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

namespace lrgmml {

class StiefelPoint {
 public:
  StiefelPoint() = default;

  // Orthonormalizes the columns of `m` by QR with positive diagonal R.
  // Throws NumericalError if `m` is (numerically) rank deficient.
  static StiefelPoint orthonormalize(const Eigen::MatrixXd& m);
  // Accepts `m` as is after checking ||m^T m - I||_F <= tol.
  static StiefelPoint checked(const Eigen::MatrixXd& m, double tol = 1e-10);

  int d() const { return static_cast<int>(u_.rows()); }
  int r() const { return static_cast<int>(u_.cols()); }
  const Eigen::MatrixXd& matrix() const { return u_; }

 private:
  explicit StiefelPoint(Eigen::MatrixXd u) : u_(std::move(u)) {}
  Eigen::MatrixXd u_;
};

// A horizontal vector: U^T xi = 0 at its anchor point. Linear combinations of
// tangent vectors at one anchor are built directly from `xi`.
struct TangentVector {
  Eigen::MatrixXd xi;
};

// Seeded Gaussian d x r matrix, orthonormalized. Requires 1 <= r <= d.
StiefelPoint random_point(int d, int r, std::uint64_t seed);

// (I - U U^T) z, evaluated as z - U (U^T z).
TangentVector project_tangent(const StiefelPoint& p, const Eigen::MatrixXd& z);

// qf(U + step * xi). step == 0 returns p unchanged.
StiefelPoint retract(const StiefelPoint& p, const TangentVector& xi,
                     double step);

// Projection of xi onto the horizontal space at p_new.
TangentVector transport(const StiefelPoint& p_new, const TangentVector& xi);

// trace(a^T b).
double tangent_inner(const TangentVector& a, const TangentVector& b);

double tangent_norm(const TangentVector& a);

}  // namespace lrgmml

#endif  // LRGMML_GRASSMANN_H_
