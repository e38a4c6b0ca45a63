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

#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gtest/gtest.h"
#include "lrgmml/errors.h"
#include "test_util.h"

namespace lrgmml {
namespace {

using testing::random_spd;
using testing::random_spd_matrix;
using testing::rel_diff;

Eigen::MatrixXd two_by_two() {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  return m;
}

// Spectral projectors of [[2,1],[1,2]] onto the eigenvalues 3 and 1.
Eigen::MatrixXd projector_three() { return 0.5 * Eigen::MatrixXd::Ones(2, 2); }
Eigen::MatrixXd projector_one() {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, -0.5, -0.5, 0.5;
  return p;
}

TEST(SymMatrixTest, SymmetrizesOnConstruction) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 4, 3;
  const SymMatrix s(m);
  EXPECT_EQ(s.matrix()(0, 1), 3.0);
  EXPECT_EQ(s.matrix()(1, 0), 3.0);
  EXPECT_THROW(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), InvalidArgument);
}

TEST(SymEigTest, DiagonalInput) {
  const EigenPair eig = sym_eig(SymMatrix(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix()));
  EXPECT_DOUBLE_EQ(eig.eigenvalues(0), 3.0);
  EXPECT_DOUBLE_EQ(eig.eigenvalues(1), 1.0);
  EXPECT_NEAR(std::abs(eig.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(eig.eigenvectors(0, 1)), 1.0, 1e-15);
}

TEST(SymEigTest, ClassicTwoByTwo) {
  const EigenPair eig = sym_eig(SymMatrix(two_by_two()));
  EXPECT_NEAR(eig.eigenvalues(0), 3.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues(1), 1.0, 1e-14);
  const double s = 1.0 / std::sqrt(2.0);
  // Columns are determined up to sign.
  EXPECT_NEAR(std::abs(eig.eigenvectors.col(0).dot(Eigen::Vector2d(s, s))), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.eigenvectors.col(1).dot(Eigen::Vector2d(s, -s))), 1.0, 1e-14);
}

TEST(SymEigTest, ReconstructsRandomSymmetric) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd g = testing::gaussian(8, 8, rng);
  const SymMatrix m(g + g.transpose());
  const EigenPair eig = sym_eig(m);
  const Eigen::MatrixXd v = eig.eigenvectors;
  EXPECT_LE((v.transpose() * v - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-12);
  EXPECT_LE(rel_diff(v * eig.eigenvalues.asDiagonal() * v.transpose(), m.matrix()), 1e-10);
  for (int k = 1; k < 8; ++k) EXPECT_GE(eig.eigenvalues(k - 1), eig.eigenvalues(k));
}

TEST(SymEigTest, RejectsNonFiniteWithRole) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    sym_eig(SymMatrix(m), "projected similar scatter");
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("projected similar scatter"), std::string::npos);
  }
}

TEST(SpdPowerTest, DiagonalSquareRoot) {
  const SpdMatrix m = SpdMatrix::diagonal(Eigen::Vector2d(4, 9));
  const Eigen::MatrixXd root = spd_power(m, 0.5).matrix();
  EXPECT_NEAR((root - Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-14);
}

TEST(SpdPowerTest, IdentityStaysIdentity) {
  const SpdMatrix eye = SpdMatrix::identity(4);
  for (double p : {-1.0, -0.5, 0.0, 0.3, 2.0}) {
    EXPECT_LE((spd_power(eye, p).matrix() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-14);
  }
}

TEST(SpdPowerTest, InverseSquareRootOfTwoByTwo) {
  // Oracle: sum of lambda^{-1/2} times spectral projectors.
  const Eigen::MatrixXd expected =
      projector_three() / std::sqrt(3.0) + projector_one();
  const SpdMatrix m = SpdMatrix::floored(SymMatrix(two_by_two()));
  const Eigen::MatrixXd got = spd_power(m, -0.5).matrix();
  EXPECT_LE((got - expected).norm(), 1e-14);
  EXPECT_NEAR(got(0, 0), 0.7887, 1e-4);
  EXPECT_NEAR(got(0, 1), -0.2113, 1e-4);
}

TEST(SpdPowerTest, MinusOneIsInverseAndHalfSquares) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix m = random_spd(6, rng);
    EXPECT_LE(rel_diff(spd_power(m, -1.0).matrix(), m.matrix().inverse()), 1e-10);
    const Eigen::MatrixXd h = spd_power(m, 0.5).matrix();
    EXPECT_LE(rel_diff(h * h, m.matrix()), 1e-9);
  }
}

TEST(SpdPowerTest, PowersCompose) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> exponent(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const SpdMatrix m = random_spd(5, rng);
    const double a = exponent(rng);
    const double b = exponent(rng);
    EXPECT_LE(rel_diff(spd_power(m, a).matrix() * spd_power(m, b).matrix(),
                       spd_power(m, a + b).matrix()),
              1e-9);
    EXPECT_LE(rel_diff(spd_logm(spd_power(m, a)).matrix(), a * spd_logm(m).matrix()), 1e-9);
  }
}

TEST(SpdPowerTest, FloorClampsAndCounts) {
  reset_numerical_health();
  const SpdMatrix m = SpdMatrix::floored(
      SymMatrix(Eigen::Vector3d(2.0, 1e-20, -1.0).asDiagonal().toDenseMatrix()));
  EXPECT_EQ(numerical_health().clamp_events, 1u);
  EXPECT_DOUBLE_EQ(m.min_eig_floor(), 2.0 * kRelativeEigFloor);
  EXPECT_GE(m.eig().eigenvalues.minCoeff(), m.min_eig_floor());
  const Eigen::MatrixXd inv = spd_power(m, -1.0).matrix();
  EXPECT_TRUE(inv.allFinite());
  EXPECT_NEAR(inv(2, 2), 1.0 / (2.0 * kRelativeEigFloor), 1e-3 / kRelativeEigFloor);
}

TEST(SpdMatrixTest, NoPositiveEigenvalueIsRejected) {
  EXPECT_THROW(SpdMatrix::floored(SymMatrix(Eigen::MatrixXd::Zero(3, 3))), NumericalError);
  EXPECT_THROW(SpdMatrix::floored(SymMatrix(-Eigen::MatrixXd::Identity(2, 2))), NumericalError);
}

TEST(SpdMatrixTest, ValidatedRejectsIndefinite) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3, -1
  EXPECT_THROW(SpdMatrix::validated(m), NumericalError);
  EXPECT_NO_THROW(SpdMatrix::validated(two_by_two()));
}

TEST(SpdLogmTest, KnownValues) {
  EXPECT_LE(spd_logm(SpdMatrix::identity(3)).matrix().norm(), 1e-15);
  const SpdMatrix m = SpdMatrix::diagonal(Eigen::Vector2d(std::exp(1.0), std::exp(2.0)));
  EXPECT_LE((spd_logm(m).matrix() - Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix()).norm(),
            1e-14);
  // Oracle: ln(3) P_3 + ln(1) P_1.
  const Eigen::MatrixXd expected = std::log(3.0) * projector_three();
  const Eigen::MatrixXd got = spd_logm(SpdMatrix::floored(SymMatrix(two_by_two()))).matrix();
  EXPECT_LE((got - expected).norm(), 1e-14);
  EXPECT_NEAR(got(0, 1), 0.5493, 1e-4);
}

TEST(SpdLogmTest, MatchesSchurBasedLogarithm) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd m = random_spd_matrix(5, rng);
    const Eigen::MatrixXd reference = m.log();
    EXPECT_LE(rel_diff(spd_logm(SpdMatrix::floored(SymMatrix(m))).matrix(), reference), 1e-10);
  }
}

TEST(GeometricMeanTest, SelfMeanIsIdentityMap) {
  std::mt19937_64 rng(1);
  const SpdMatrix x = random_spd(4, rng);
  for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    EXPECT_LE(rel_diff(weighted_geometric_mean(x, x, t).matrix(), x.matrix()), 1e-12);
  }
}

TEST(GeometricMeanTest, CommutingDiagonalCase) {
  const SpdMatrix x = SpdMatrix::diagonal(Eigen::Vector2d(1, 0.25));
  const SpdMatrix y = SpdMatrix::diagonal(Eigen::Vector2d(9, 1));
  const Eigen::MatrixXd gm = weighted_geometric_mean(x, y, 0.5).matrix();
  EXPECT_LE((gm - Eigen::Vector2d(3, 0.5).asDiagonal().toDenseMatrix()).norm(), 1e-12);
}

TEST(GeometricMeanTest, EndpointsAreExact) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix x = random_spd(5, rng);
    const SpdMatrix y = random_spd(5, rng);
    EXPECT_LE(rel_diff(weighted_geometric_mean(x, y, 0.0).matrix(), x.matrix()), 1e-10);
    EXPECT_LE(rel_diff(weighted_geometric_mean(x, y, 1.0).matrix(), y.matrix()), 1e-10);
  }
}

TEST(GeometricMeanTest, MidpointIsSymmetricAndMatchesDirectFormula) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix x = random_spd(5, rng);
    const SpdMatrix y = random_spd(5, rng);
    const Eigen::MatrixXd xy = weighted_geometric_mean(x, y, 0.5).matrix();
    const Eigen::MatrixXd yx = weighted_geometric_mean(y, x, 0.5).matrix();
    EXPECT_LE(rel_diff(xy, yx), 1e-9);
    // X # Y = X (X^{-1} Y)^{1/2}, via a Schur-based square root of a
    // non-symmetric matrix.
    const Eigen::MatrixXd direct = x.matrix() * (x.matrix().inverse() * y.matrix()).sqrt();
    EXPECT_LE(rel_diff(xy, direct), 1e-9);
  }
}

TEST(GeometricMeanTest, RejectsBadArguments) {
  const SpdMatrix a = SpdMatrix::identity(2);
  const SpdMatrix b = SpdMatrix::identity(3);
  EXPECT_THROW(weighted_geometric_mean(a, b, 0.5), InvalidArgument);
  EXPECT_THROW(weighted_geometric_mean(a, a, 1.5), InvalidArgument);
}

TEST(RiemannianDistanceTest, KnownValues) {
  std::mt19937_64 rng(6);
  const SpdMatrix x = random_spd(4, rng);
  EXPECT_NEAR(riemannian_distance_sq(x, x), 0.0, 1e-20);
  const SpdMatrix y = SpdMatrix::diagonal(Eigen::Vector2d(std::exp(1.0), std::exp(-1.0)));
  EXPECT_NEAR(riemannian_distance_sq(SpdMatrix::identity(2), y), 2.0, 1e-13);
  EXPECT_THROW(riemannian_distance_sq(SpdMatrix::identity(2), SpdMatrix::identity(3)),
               InvalidArgument);
}

TEST(RiemannianDistanceTest, SymmetricAndCongruenceInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const SpdMatrix x = random_spd(5, rng);
    const SpdMatrix y = random_spd(5, rng);
    Eigen::MatrixXd m = testing::gaussian(5, 5, rng);
    m += 3.0 * Eigen::MatrixXd::Identity(5, 5);  // keep it invertible
    const SpdMatrix mx = SpdMatrix::floored(SymMatrix(m * x.matrix() * m.transpose()));
    const SpdMatrix my = SpdMatrix::floored(SymMatrix(m * y.matrix() * m.transpose()));
    const double base = riemannian_distance_sq(x, y);
    EXPECT_NEAR(riemannian_distance_sq(y, x), base, 1e-9 * std::max(1.0, base));
    EXPECT_NEAR(riemannian_distance_sq(mx, my), base, 1e-8 * std::max(1.0, base));
  }
}

TEST(RiemannianDistanceTest, GeodesicParameterizationFromIdentity) {
  std::mt19937_64 rng(9);
  const SpdMatrix eye = SpdMatrix::identity(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix y = random_spd(4, rng);
    const double full = riemannian_distance_sq(y, eye);
    for (double t : {0.1, 0.5, 0.8}) {
      const SpdMatrix mid = weighted_geometric_mean(eye, y, t);
      EXPECT_NEAR(riemannian_distance_sq(mid, eye), t * t * full, 1e-8);
    }
  }
}

}  // namespace
}  // namespace lrgmml
