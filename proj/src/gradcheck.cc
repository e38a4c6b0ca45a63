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

#include "lrgmml/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrgmml/errors.h"

namespace lrgmml {

RandomInstance random_instance(int d, int r, int n_pairs, std::uint64_t seed) {
  if (r < 1 || r > d || n_pairs < 1) {
    throw InvalidArgument("random_instance: need 1 <= r <= d and n_pairs >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n_points = 2 * n_pairs;
  Eigen::MatrixXd points(n_points, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n_points; ++i) points(i, j) = gauss(rng);
  }
  // Anisotropic feature scales keep the two scatters from being proportional.
  Eigen::VectorXd scales(d);
  std::uniform_real_distribution<double> scale_dist(0.5, 2.0);
  for (int j = 0; j < d; ++j) scales(j) = scale_dist(rng);
  const Eigen::MatrixXd similar_points = points * (0.3 * scales).asDiagonal();
  const Eigen::MatrixXd dissimilar_points = points * scales.reverse().asDiagonal();

  std::uniform_int_distribution<int> pick(0, n_points - 1);
  std::vector<IndexPair> pairs_s;
  std::vector<IndexPair> pairs_d;
  for (int k = 0; k < n_pairs; ++k) {
    pairs_s.emplace_back(pick(rng), pick(rng));
    pairs_d.emplace_back(pick(rng), pick(rng));
  }
  return RandomInstance{build_scatter(similar_points, pairs_s),
                        build_scatter(dissimilar_points, pairs_d),
                        random_point(d, r, seed ^ 0x9e3779b97f4a7c15ULL)};
}

GradCheckReport gradient_check(int d, int r, std::span<const double> ts,
                               int num_instances, int num_directions,
                               std::uint64_t seed) {
  if (ts.empty() || num_instances < 1 || num_directions < 1) {
    throw InvalidArgument("gradient_check: need t values, instances and directions");
  }
  GradCheckReport report;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::vector<std::uint32_t> seeds(static_cast<std::size_t>(num_instances));
  seq.generate(seeds.begin(), seeds.end());

  for (int i = 0; i < num_instances; ++i) {
    GradCheckInstance inst;
    inst.seed = seeds[static_cast<std::size_t>(i)];
    inst.t = ts[static_cast<std::size_t>(i) % ts.size()];
    const RandomInstance problem = random_instance(d, r, 5 * d, inst.seed);
    const StiefelPoint& u = problem.u;
    const TangentVector grad =
        project_tangent(u, egrad(u, problem.similar, problem.dissimilar, inst.t));
    const double h = 1e-5 * u.matrix().norm();

    std::mt19937_64 rng(inst.seed + 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < num_directions; ++k) {
      Eigen::MatrixXd z(d, r);
      for (int c = 0; c < r; ++c) {
        for (int row = 0; row < d; ++row) z(row, c) = gauss(rng);
      }
      TangentVector xi = project_tangent(u, z);
      xi.xi /= tangent_norm(xi);
      const double f_plus = cost(retract(u, xi, h), problem.similar, problem.dissimilar, inst.t);
      const double f_minus = cost(retract(u, xi, -h), problem.similar, problem.dissimilar, inst.t);
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double an = tangent_inner(grad, xi);
      inst.finite_difference.push_back(fd);
      inst.analytic.push_back(an);
      num += fd * an;
      den += an * an;
    }
    inst.kappa = num / den;
    report.instances.push_back(std::move(inst));
  }

  double sum = 0.0;
  for (const auto& inst : report.instances) sum += inst.kappa;
  report.kappa_mean = sum / num_instances;
  double ss = 0.0;
  for (const auto& inst : report.instances) {
    ss += (inst.kappa - report.kappa_mean) * (inst.kappa - report.kappa_mean);
  }
  const double std_dev = num_instances > 1 ? std::sqrt(ss / (num_instances - 1)) : 0.0;
  report.kappa_rel_std = std_dev / std::abs(report.kappa_mean);
  for (const auto& inst : report.instances) {
    for (std::size_t k = 0; k < inst.analytic.size(); ++k) {
      const double fd = inst.finite_difference[k];
      const double err = std::abs(fd - report.kappa_mean * inst.analytic[k]) /
                         std::max(std::abs(fd), 1e-300);
      report.max_rel_error = std::max(report.max_rel_error, err);
    }
  }
  return report;
}

}  // namespace lrgmml
