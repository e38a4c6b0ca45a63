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

// Finite-difference check of egrad() against cost() along retraction curves.
//
// For a tangent direction xi at U the harness compares the central difference
//   (f(R(U, h xi)) - f(R(U, -h xi))) / 2h
// with <project_tangent(U, egrad(U)), xi>. The ratio kappa is fitted per
// instance by least squares; a correct closed form gives the same kappa on
// every instance.

#ifndef LRGMML_GRADCHECK_H_
#define LRGMML_GRADCHECK_H_

#include <cstdint>
#include <span>
#include <vector>

#include "lrgmml/objective.h"

namespace lrgmml {

struct RandomInstance {
  PairScatter similar;
  PairScatter dissimilar;
  StiefelPoint u;
};

// Gaussian points in R^d with random similar/dissimilar pairs, and a random
// subspace of dimension r. Similar pairs are drawn from a squeezed copy of the
// data so that the two scatters differ.
RandomInstance random_instance(int d, int r, int n_pairs, std::uint64_t seed);

struct GradCheckInstance {
  std::uint64_t seed = 0;
  double t = 0.5;
  double kappa = 0.0;
  std::vector<double> finite_difference;
  std::vector<double> analytic;  // <project_tangent(egrad), xi>
};

struct GradCheckReport {
  std::vector<GradCheckInstance> instances;
  double kappa_mean = 0.0;
  double kappa_rel_std = 0.0;   // stddev / mean over instances
  double max_rel_error = 0.0;   // |fd - kappa_mean * analytic| / |fd|

  bool passed(double rel_tol = 1e-5, double kappa_tol = 1e-6) const {
    return max_rel_error <= rel_tol && kappa_rel_std <= kappa_tol;
  }
};

// Instance i uses t = ts[i % ts.size()].
GradCheckReport gradient_check(int d, int r, std::span<const double> ts,
                               int num_instances, int num_directions,
                               std::uint64_t seed);

}  // namespace lrgmml

#endif  // LRGMML_GRADCHECK_H_
