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

// Matrix functions on symmetric positive-definite matrices, computed through
// a symmetric eigendecomposition. An SpdMatrix keeps its decomposition so that
// several functions of the same matrix (square root, inverse square root,
// logarithm) share one factorization.

#ifndef LRGMML_SPD_H_
#define LRGMML_SPD_H_

#include <cstddef>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace lrgmml {

// Dense square matrix stored symmetrized as (M + M^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

struct EigenPair {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues(k)
};

// Full spectral decomposition. `role` names the matrix in diagnostics.
EigenPair sym_eig(const SymMatrix& m, std::string_view role = "matrix");

// Per-thread counters of silent numerical repairs.
struct NumericalHealth {
  std::size_t clamp_events = 0;  // eigenvalues raised to the floor
};
NumericalHealth& numerical_health();
void reset_numerical_health();

// Eigenvalues below kRelativeEigFloor * lambda_max are clamped.
inline constexpr double kRelativeEigFloor = 1e-12;

class SpdMatrix {
 public:
  // Clamps eigenvalues below rel_floor * lambda_max to that threshold and
  // records a clamp event. Throws NumericalError when lambda_max <= 0.
  static SpdMatrix floored(const SymMatrix& m,
                           double rel_floor = kRelativeEigFloor,
                           std::string_view role = "matrix");
  // Throws NumericalError unless every eigenvalue is at least
  // kRelativeEigFloor * lambda_max and strictly positive. No clamping.
  static SpdMatrix validated(const Eigen::MatrixXd& m,
                             std::string_view role = "matrix");
  static SpdMatrix identity(int dim);
  static SpdMatrix diagonal(const Eigen::VectorXd& values);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const EigenPair& eig() const { return eig_; }
  double min_eig_floor() const { return floor_; }

 private:
  friend SpdMatrix spd_power(const SpdMatrix& m, double p);
  static SpdMatrix from_spectrum(EigenPair eig, double rel_floor);
  SpdMatrix(Eigen::MatrixXd m, EigenPair eig, double floor)
      : m_(std::move(m)), eig_(std::move(eig)), floor_(floor) {}

  Eigen::MatrixXd m_;
  EigenPair eig_;
  double floor_ = 0.0;
};

// V diag(lambda^p) V^T.
SpdMatrix spd_power(const SpdMatrix& m, double p);

// V diag(log lambda) V^T.
SymMatrix spd_logm(const SpdMatrix& m);

// Point at parameter t on the affine-invariant geodesic from x to y:
// x^{1/2} (x^{-1/2} y x^{-1/2})^t x^{1/2}. Returns x at t = 0 and y at t = 1.
SpdMatrix weighted_geometric_mean(const SpdMatrix& x, const SpdMatrix& y,
                                  double t);

// ||logm(x^{-1/2} y x^{-1/2})||_F^2.
double riemannian_distance_sq(const SpdMatrix& x, const SpdMatrix& y);

}  // namespace lrgmml

#endif  // LRGMML_SPD_H_
