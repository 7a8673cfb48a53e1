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
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "profilekit/theory/properties.hpp"

namespace profilekit::theory {

/// Squared-exponential kernel variance * exp(-|a - b|^2 / (2 lengthscale^2)).
struct RbfKernel {
  double variance = 1.0;
  double lengthscale = 1.0;

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return variance * std::exp(-0.5 * (a - b).squaredNorm() / (lengthscale * lengthscale));
  }
  double operator()(double a, double b) const {
    const double d = a - b;
    return variance * std::exp(-0.5 * d * d / (lengthscale * lengthscale));
  }
};

struct GPPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean noiseless GP regression conditioned on (X, Y). The kernel matrix
/// (plus jitter on the diagonal) is Cholesky-factorized once at construction.
template <typename Input = Eigen::VectorXd>
class GPModel {
 public:
  using Kernel = std::function<double(const Input&, const Input&)>;

  GPModel(Kernel kernel, std::vector<Input> inputs, std::vector<double> targets, double jitter = 1e-9)
      : kernel_(std::move(kernel)), inputs_(std::move(inputs)), targets_(std::move(targets)), jitter_(jitter) {
    if (!kernel_) fail("GP model has no kernel");
    if (inputs_.size() != targets_.size()) fail("GP inputs and targets differ in length");
    if (!(jitter_ >= 0.0)) fail("GP jitter must be non-negative");
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    if (n == 0) return;
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        k(i, j) = k(j, i) = kernel_(inputs_[static_cast<std::size_t>(i)], inputs_[static_cast<std::size_t>(j)]);
      }
      k(i, i) += jitter_;
    }
    chol_.compute(k);
    if (chol_.info() != Eigen::Success || !chol_.matrixL().toDenseMatrix().allFinite()) {
      fail("kernel matrix is not positive definite after jitter");
    }
    const Eigen::Map<const Eigen::VectorXd> y(targets_.data(), n);
    weights_ = chol_.solve(y);
    // Iterative refinement with the residual in extended precision; the
    // weights can be large when training inputs nearly coincide.
    using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> k_ext = k.cast<long double>();
    for (int step = 0; step < 3; ++step) {
      const ExtVector residual = y.cast<long double>() - k_ext * weights_.cast<long double>();
      weights_ += chol_.solve(residual.cast<double>());
    }
  }

  std::size_t size() const noexcept { return inputs_.size(); }
  const std::vector<Input>& inputs() const noexcept { return inputs_; }
  const std::vector<double>& targets() const noexcept { return targets_; }
  double jitter() const noexcept { return jitter_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  /// mean = k*^T K^{-1} Y, variance = k(x*, x*) - k*^T K^{-1} k*, floored at 0.
  GPPosterior posterior(const Input& query) const {
    const double prior = kernel_(query, query);
    if (inputs_.empty()) return {0.0, std::max(0.0, prior)};
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Eigen::VectorXd cross(n);
    for (Eigen::Index i = 0; i < n; ++i) cross(i) = kernel_(inputs_[static_cast<std::size_t>(i)], query);
    const Eigen::VectorXd v = chol_.matrixL().solve(cross);
    return {cross.dot(weights_), std::max(0.0, prior - v.squaredNorm())};
  }

  /// The same model with one more training observation.
  GPModel with_observation(Input x, double y) const {
    auto inputs = inputs_;
    auto targets = targets_;
    inputs.push_back(std::move(x));
    targets.push_back(y);
    return GPModel(kernel_, std::move(inputs), std::move(targets), jitter_);
  }

 private:
  Kernel kernel_;
  std::vector<Input> inputs_;
  std::vector<double> targets_;
  double jitter_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;
};

template <typename Input>
GPPosterior gp_posterior(const GPModel<Input>& model, const Input& query) {
  return model.posterior(query);
}

/// Query indices from hardest (largest posterior variance) to easiest; equal
/// variances keep their input order.
template <typename Input>
std::vector<std::size_t> gp_difficulty_order(const GPModel<Input>& model, std::span<const Input> queries) {
  std::vector<double> variance(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) variance[i] = model.posterior(queries[i]).variance;
  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
  return order;
}

}  // namespace profilekit::theory
