// Copyright 2026 The profilekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "profilekit/theory/properties.hpp"

namespace profilekit::theory {

enum class Approximation { kPiecewiseConstant, kPiecewiseLinear };

/// A Lipschitz target on [0,1]^d learned by a partition into C^d cubes of side
/// 1/C. Piecewise-constant uses the value at each cube's center; the
/// piecewise-linear variant (1-D only) interpolates between cell endpoints.
struct ManifoldModel {
  std::size_t dimension = 1;
  double lipschitz = 1.0;
  std::function<double(std::span<const double>)> target;
  std::size_t cells_per_axis = 1;
  Approximation approximation = Approximation::kPiecewiseConstant;

  void validate() const {
    if (dimension == 0) fail("manifold dimension must be positive");
    if (!(lipschitz > 0.0)) fail("Lipschitz constant must be positive");
    if (cells_per_axis == 0) fail("cells per axis must be at least 1");
    if (!target) fail("manifold model has no target function");
    if (approximation == Approximation::kPiecewiseLinear && dimension != 1) {
      fail("piecewise-linear approximation is only available in one dimension");
    }
  }

  /// n = C^d.
  double num_cells() const { return std::pow(static_cast<double>(cells_per_axis), static_cast<double>(dimension)); }

  /// Worst-case pointwise error L * sqrt(d) / (2C).
  double error_bound() const {
    return lipschitz * std::sqrt(static_cast<double>(dimension)) / (2.0 * static_cast<double>(cells_per_axis));
  }

  double approximate(std::span<const double> x) const {
    const double c = static_cast<double>(cells_per_axis);
    auto cell_of = [&](double v) {
      return std::min(static_cast<double>(cells_per_axis - 1), std::floor(v * c));
    };
    if (approximation == Approximation::kPiecewiseLinear) {
      const double lo = cell_of(x[0]) / c;
      const double hi = lo + 1.0 / c;
      const double t = (x[0] - lo) * c;
      const double a = target(std::span<const double>(&lo, 1));
      const double b = target(std::span<const double>(&hi, 1));
      return (1.0 - t) * a + t * b;
    }
    std::vector<double> center(dimension);
    for (std::size_t i = 0; i < dimension; ++i) center[i] = (cell_of(x[i]) + 0.5) / c;
    return target(center);
  }
};

/// |target(x) - approximation(x)| at each evaluation point.
inline std::vector<double> manifold_errors(const ManifoldModel& model, std::span<const std::vector<double>> points) {
  model.validate();
  std::vector<double> errors;
  errors.reserve(points.size());
  for (const auto& x : points) {
    if (x.size() != model.dimension) fail("evaluation point has the wrong dimension");
    for (double v : x) {
      if (!(v >= 0.0 && v <= 1.0)) fail("evaluation point lies outside the unit cube");
    }
    errors.push_back(std::abs(model.target(x) - model.approximate(x)));
  }
  return errors;
}

struct ScalingFit {
  double prefactor = 0.0;
  double exponent = 0.0;
};

/// Least-squares fit of error = prefactor * n^(-exponent) in log-log space.
inline ScalingFit fit_scaling(std::span<const std::pair<double, double>> errors_by_n) {
  if (errors_by_n.size() < 2) fail("scaling fit needs at least two (n, error) pairs");
  double mx = 0.0, my = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(errors_by_n.size());
  for (const auto& [n, err] : errors_by_n) {
    if (!(n > 0.0) || !(err > 0.0)) fail("scaling fit needs positive n and error values");
    logs.emplace_back(std::log(n), std::log(err));
    mx += logs.back().first;
    my += logs.back().second;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0.0) fail("scaling fit needs at least two distinct n");
  const double slope = sxy / sxx;
  return {std::exp(my - slope * mx), -slope};
}

struct SweepResult {
  std::vector<std::pair<double, double>> max_error_by_n;
  bool within_bound = true;
  ScalingFit fit;
};

/// Max error over `points` for each cell count, plus the fitted scaling law.
inline SweepResult scaling_sweep(ManifoldModel model, std::span<const std::size_t> cells_per_axis,
                                 std::span<const std::vector<double>> points) {
  SweepResult out;
  for (std::size_t c : cells_per_axis) {
    model.cells_per_axis = c;
    const auto errors = manifold_errors(model, points);
    const double bound = model.error_bound();
    double worst = 0.0;
    for (double e : errors) {
      worst = std::max(worst, e);
      if (e > bound * (1.0 + 1e-12)) out.within_bound = false;
    }
    out.max_error_by_n.emplace_back(model.num_cells(), worst);
  }
  out.fit = fit_scaling(out.max_error_by_n);
  return out;
}

/// Regular lattice with `per_axis` points per axis spanning [0,1]^d.
inline std::vector<std::vector<double>> lattice(std::size_t dimension, std::size_t per_axis) {
  if (per_axis < 2) fail("lattice needs at least 2 points per axis");
  std::size_t total = 1;
  for (std::size_t i = 0; i < dimension; ++i) total *= per_axis;
  std::vector<std::vector<double>> out(total, std::vector<double>(dimension));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < dimension; ++i) {
      out[idx][i] = static_cast<double>(rest % per_axis) / static_cast<double>(per_axis - 1);
      rest /= per_axis;
    }
  }
  return out;
}

}  // namespace profilekit::theory
