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
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "profilekit/error.hpp"
#include "profilekit/parallel.hpp"
#include "profilekit/profile.hpp"

namespace profilekit {

namespace similarity {
inline constexpr std::string_view kModule = "similarity";
inline constexpr double kDistributionTolerance = 1e-6;
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }
}  // namespace similarity

enum class MetricKind { kTV, kKL, kCosine };

struct DistributionMetric {
  MetricKind kind = MetricKind::kTV;
  double epsilon = 1e-12;  // KL clamp floor

  bool symmetric() const noexcept { return kind != MetricKind::kKL; }
};

inline MetricKind parse_metric(std::string_view name) {
  if (name == "tv") return MetricKind::kTV;
  if (name == "kl") return MetricKind::kKL;
  if (name == "cosine") return MetricKind::kCosine;
  similarity::fail("unknown metric '" + std::string(name) + "' (expected tv, kl or cosine)");
}

namespace similarity::detail {

inline void check_distribution(std::span<const double> q, const char* which) {
  double sum = 0.0;
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(which) + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    fail(std::string(which) + " sums to " + format_double(sum) + ", not a distribution");
  }
}

inline std::vector<double> clamp_renormalize(std::span<const double> q, double eps) {
  std::vector<double> out(q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += (out[i] = std::max(q[i], eps));
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace similarity::detail

/// Distance between two distributions over the same label set. KL is
/// d(q1 || q2) after flooring both arguments at epsilon and renormalizing.
inline double dist(const DistributionMetric& metric, std::span<const double> q1, std::span<const double> q2) {
  using namespace similarity;
  if (q1.size() != q2.size()) {
    fail("distribution lengths differ (" + std::to_string(q1.size()) + " vs " + std::to_string(q2.size()) + ")");
  }
  if (q1.empty()) fail("distributions are empty");
  detail::check_distribution(q1, "first distribution");
  detail::check_distribution(q2, "second distribution");
  switch (metric.kind) {
    case MetricKind::kTV: {
      double s = 0.0;
      for (std::size_t i = 0; i < q1.size(); ++i) s += std::abs(q1[i] - q2[i]);
      return std::min(1.0, 0.5 * s);
    }
    case MetricKind::kKL: {
      if (!(metric.epsilon > 0.0)) fail("KL epsilon must be positive");
      const auto a = detail::clamp_renormalize(q1, metric.epsilon);
      const auto b = detail::clamp_renormalize(q2, metric.epsilon);
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * (std::log(a[i]) - std::log(b[i]));
      return std::max(0.0, s);  // rounding can dip below zero for near-equal inputs
    }
    case MetricKind::kCosine: {
      double dot = 0.0, n1 = 0.0, n2 = 0.0;
      for (std::size_t i = 0; i < q1.size(); ++i) {
        dot += q1[i] * q2[i];
        n1 += q1[i] * q1[i];
        n2 += q2[i] * q2[i];
      }
      return std::max(0.0, 1.0 - dot / (std::sqrt(n1) * std::sqrt(n2)));
    }
  }
  return 0.0;
}

/// Trapezoidal mean of the pointwise distance over the shared grid.
inline double profile_distance(const SoftmaxProfile& a, const SoftmaxProfile& b, const DistributionMetric& metric) {
  if (!(a.grid == b.grid)) similarity::fail("profiles are defined on different grids");
  if (a.num_classes != b.num_classes) similarity::fail("profiles have different label sets");
  const std::size_t n = a.grid.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = dist(metric, a.at(i), b.at(i));
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) area += 0.5 * (d[i] + d[i + 1]) * (a.grid[i + 1] - a.grid[i]);
  return area / a.grid.span();
}

/// Softmax profiles of one training procedure over a set of points.
struct ProfileFamily {
  std::string name;
  std::vector<std::size_t> point_ids;
  std::vector<SoftmaxProfile> profiles;  // index-aligned with point_ids
};

struct DistanceMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // row-major, names.size() squared

  double operator()(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

/// Mean profile distance over the points two families share.
inline double family_distance(const ProfileFamily& a, const ProfileFamily& b, const DistributionMetric& metric) {
  std::map<std::size_t, const SoftmaxProfile*> index;
  for (std::size_t i = 0; i < b.point_ids.size(); ++i) index[b.point_ids[i]] = &b.profiles[i];
  double total = 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < a.point_ids.size(); ++i) {
    const auto it = index.find(a.point_ids[i]);
    if (it == index.end()) continue;
    total += profile_distance(a.profiles[i], *it->second, metric);
    ++shared;
  }
  if (shared == 0) similarity::fail("families '" + a.name + "' and '" + b.name + "' share no points");
  return total / static_cast<double>(shared);
}

/// Entry (i, j) is the distance from family i to family j. TV and cosine
/// matrices are symmetric with a zero diagonal; KL is emitted as computed.
inline DistanceMatrix pairwise_matrix(std::span<const ProfileFamily> families, const DistributionMetric& metric) {
  if (families.empty()) similarity::fail("no families to compare");
  const std::size_t n = families.size();
  DistanceMatrix out;
  for (const auto& f : families) out.names.push_back(f.name);
  out.values.assign(n * n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (metric.symmetric() && j <= i) continue;
      cells.emplace_back(i, j);
    }
  }
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto [i, j] = cells[c];
    out.values[i * n + j] = family_distance(families[i], families[j], metric);
  });
  if (metric.symmetric()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) out.values[i * n + j] = out.values[j * n + i];
    }
  }
  return out;
}

/// Mean over points of |A_a(p) - A_b(p)| at each grid coordinate.
inline ProfileCurve pointwise_gap(const RunCollection& a, const RunCollection& b, const AccuracyGrid& grid,
                                  ProfileOptions options = {}) {
  if (a.num_points() != b.num_points()) {
    similarity::fail("collections have " + std::to_string(a.num_points()) + " and " +
                     std::to_string(b.num_points()) + " points");
  }
  const Profiler pa(a, grid, options);
  const Profiler pb(b, grid, options);
  const std::size_t n = a.num_points();
  std::vector<std::vector<double>> diffs(n);
  parallel_for(n, [&](std::size_t z) {
    const auto ca = pa.accuracy(z);
    const auto cb = pb.accuracy(z);
    diffs[z].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) diffs[z][i] = std::abs(ca.values[i] - cb.values[i]);
  });
  ProfileCurve out{grid, std::vector<double>(grid.size(), 0.0), ProfileKind::kAccuracy};
  for (const auto& d : diffs) {
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] += d[i];
  }
  for (double& v : out.values) v = std::clamp(v / static_cast<double>(n), 0.0, 1.0);
  return out;
}

inline void write_csv(std::ostream& out, const DistanceMatrix& m) {
  for (const auto& name : m.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace profilekit
