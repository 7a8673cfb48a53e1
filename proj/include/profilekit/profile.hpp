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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "profilekit/error.hpp"
#include "profilekit/logstore.hpp"

namespace profilekit {

namespace profile_engine {
inline constexpr std::string_view kModule = "profile-engine";
inline constexpr double kMinSpan = 1e-6;
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }
}  // namespace profile_engine

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Equally spaced global-accuracy coordinates, 50 points unless overridden.
class AccuracyGrid {
 public:
  static constexpr std::size_t kDefaultSize = 50;

  AccuracyGrid(double p_min, double p_max, std::size_t size = kDefaultSize)
      : p_min_(p_min), p_max_(p_max) {
    if (!(std::isfinite(p_min) && std::isfinite(p_max) && p_min < p_max)) {
      profile_engine::fail("grid needs p_min < p_max, got [" + format_double(p_min) + ", " +
                           format_double(p_max) + "]");
    }
    if (size < 2) profile_engine::fail("grid needs at least 2 points");
    values_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      values_[i] = p_min + (p_max - p_min) * static_cast<double>(i) / static_cast<double>(size - 1);
    }
    values_.back() = p_max;
  }

  double p_min() const noexcept { return p_min_; }
  double p_max() const noexcept { return p_max_; }
  double span() const noexcept { return p_max_ - p_min_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const AccuracyGrid&, const AccuracyGrid&) = default;

 private:
  double p_min_;
  double p_max_;
  std::vector<double> values_;
};

enum class ProfileKind { kAccuracy, kSoftAccuracy, kEntropy, kNegEntropy };

inline const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::kAccuracy: return "accuracy";
    case ProfileKind::kSoftAccuracy: return "soft_accuracy";
    case ProfileKind::kEntropy: return "entropy";
    case ProfileKind::kNegEntropy: return "neg_entropy";
  }
  return "unknown";
}

/// A scalar statistic of one point as a function of global accuracy.
struct ProfileCurve {
  AccuracyGrid grid;
  std::vector<double> values;
  ProfileKind kind = ProfileKind::kAccuracy;

  /// Entropy curve flipped to the "higher is better" orientation.
  ProfileCurve negated() const {
    ProfileCurve out = *this;
    for (double& v : out.values) v = -v;
    if (kind == ProfileKind::kEntropy) out.kind = ProfileKind::kNegEntropy;
    else if (kind == ProfileKind::kNegEntropy) out.kind = ProfileKind::kEntropy;
    return out;
  }
};

/// Averaged predictive distribution of one point at every grid coordinate.
struct SoftmaxProfile {
  AccuracyGrid grid;
  std::size_t num_classes = 0;
  std::vector<double> data;  // row-major [grid.size() x num_classes]

  std::span<const double> at(std::size_t grid_index) const {
    return std::span<const double>(data).subspan(grid_index * num_classes, num_classes);
  }
};

/// Running maximum of the checkpoint accuracies: the global-accuracy
/// coordinate of each checkpoint, forced non-decreasing.
inline std::vector<double> reparameterize(std::span<const double> accuracies) {
  if (accuracies.size() < 2) {
    profile_engine::fail("reparameterization needs at least 2 checkpoints, got " +
                         std::to_string(accuracies.size()));
  }
  std::vector<double> p(accuracies.begin(), accuracies.end());
  for (std::size_t k = 1; k < p.size(); ++k) p[k] = std::max(p[k], p[k - 1]);
  return p;
}

/// p-coordinate of each checkpoint of `run` (index-aligned with its checkpoints).
inline std::vector<double> reparameterize(const RunLog& run) {
  const auto acc = run.global_accuracies();
  return reparameterize(std::span<const double>(acc));
}

/// 1-D Gaussian filter in sample-index units with half-sample symmetric
/// ("reflect") boundaries and the kernel truncated at `truncate` sigmas.
/// sigma == 0 returns the input unchanged.
inline std::vector<double> gaussian_filter(std::span<const double> x, double sigma,
                                           double truncate = 4.0) {
  if (sigma < 0.0 || !std::isfinite(sigma)) profile_engine::fail("sigma must be non-negative");
  std::vector<double> out(x.begin(), x.end());
  if (sigma == 0.0 || x.empty()) return out;
  const auto radius = static_cast<long>(truncate * sigma + 0.5);
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double mass = 0.0;
  for (long j = -radius; j <= radius; ++j) {
    const double w = std::exp(-0.5 * static_cast<double>(j * j) / (sigma * sigma));
    kernel[static_cast<std::size_t>(j + radius)] = w;
    mass += w;
  }
  for (double& w : kernel) w /= mass;

  const long n = static_cast<long>(x.size());
  auto reflect = [n](long i) {
    const long period = 2 * n;
    long m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
  };
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      acc += kernel[static_cast<std::size_t>(j + radius)] * x[static_cast<std::size_t>(reflect(i + j))];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

/// Smooths `values` along the checkpoint sequence, then linearly interpolates
/// them from the (non-decreasing) coordinates `p` onto `grid`. Checkpoints
/// sharing a coordinate are merged into their mean; grid points outside the
/// sampled range take the nearest endpoint value.
inline std::vector<double> smooth_and_grid(std::span<const double> p, std::span<const double> values,
                                           const AccuracyGrid& grid, double sigma = 2.0) {
  using profile_engine::fail;
  if (p.size() != values.size()) fail("coordinate and value sequences differ in length");
  if (p.size() < 2) fail("smoothing needs at least 2 samples");
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] < p[k - 1]) fail("sample coordinates must be non-decreasing");
  }
  if (p.back() - p.front() < profile_engine::kMinSpan) {
    fail("degenerate accuracy range [" + format_double(p.front()) + ", " + format_double(p.back()) + "]");
  }
  const std::vector<double> smoothed = gaussian_filter(values, sigma);

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < p.size();) {
    std::size_t end = k;
    double sum = 0.0;
    while (end < p.size() && p[end] == p[k]) sum += smoothed[end++];
    xs.push_back(p[k]);
    ys.push_back(sum / static_cast<double>(end - k));
    k = end;
  }

  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = grid[i];
    if (g <= xs.front()) {
      out[i] = ys.front();
    } else if (g >= xs.back()) {
      out[i] = ys.back();
    } else {
      const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), g) - xs.begin());
      const std::size_t lo = hi - 1;
      const double t = (g - xs[lo]) / (xs[hi] - xs[lo]);
      out[i] = ys[lo] + t * (ys[hi] - ys[lo]);
    }
  }
  return out;
}

inline double shannon_entropy(std::span<const float> row) {
  double h = 0.0;
  for (float v : row) {
    if (v > 0.0f) h -= static_cast<double>(v) * std::log(static_cast<double>(v));
  }
  return std::max(0.0, h);
}

struct ProfileOptions {
  double sigma = 2.0;  // 0 disables smoothing (raw-curve diagnostics)
  std::size_t grid_size = AccuracyGrid::kDefaultSize;
};

/// Intersection of the runs' covered accuracy ranges.
inline AccuracyGrid default_grid(const RunCollection& reference,
                                 std::size_t size = AccuracyGrid::kDefaultSize) {
  double lo = -1.0;
  double hi = 2.0;
  for (const RunLog& run : reference.runs()) {
    const auto p = reparameterize(run);
    lo = std::max(lo, p.front());
    hi = std::min(hi, p.back());
  }
  if (hi - lo < profile_engine::kMinSpan) {
    profile_engine::fail("the runs' accuracy ranges do not overlap (intersection [" + format_double(lo) +
                         ", " + format_double(hi) + "])");
  }
  return AccuracyGrid(lo, hi, size);
}

/// Computes per-point learning profiles of a collection. The p-axis of run r
/// comes from run r of `reference` (the collection itself unless an
/// in-distribution reference is supplied). Holds references to both
/// collections; they must outlive the profiler.
class Profiler {
 public:
  explicit Profiler(const RunCollection& coll, std::optional<AccuracyGrid> grid = std::nullopt,
                    ProfileOptions options = {})
      : Profiler(coll, coll, std::move(grid), options) {}

  Profiler(const RunCollection& coll, const RunCollection& reference,
           std::optional<AccuracyGrid> grid = std::nullopt, ProfileOptions options = {})
      : coll_(coll),
        options_(options),
        grid_(grid ? std::move(*grid) : default_grid(reference, options.grid_size)) {
    if (reference.size() != coll.size()) {
      profile_engine::fail("reference has " + std::to_string(reference.size()) + " runs, profiled collection has " +
                           std::to_string(coll.size()));
    }
    coords_.reserve(coll.size());
    for (std::size_t r = 0; r < coll.size(); ++r) {
      if (reference[r].num_checkpoints() != coll[r].num_checkpoints()) {
        profile_engine::fail("run " + std::to_string(r) + ": reference has " +
                             std::to_string(reference[r].num_checkpoints()) + " checkpoints, profiled run has " +
                             std::to_string(coll[r].num_checkpoints()));
      }
      coords_.push_back(reparameterize(reference[r]));
    }
  }

  const AccuracyGrid& grid() const noexcept { return grid_; }
  const RunCollection& collection() const noexcept { return coll_; }
  std::size_t num_runs() const noexcept { return coll_.size(); }

  /// p-coordinates of run r, index-aligned with its checkpoints.
  std::span<const double> coordinates(std::size_t run) const { return coords_[run]; }

  ProfileCurve accuracy(std::size_t point) const {
    return mean_curve(per_run_accuracy(point), ProfileKind::kAccuracy);
  }

  /// Accuracy profile of every run separately (before averaging over runs).
  std::vector<ProfileCurve> per_run_accuracy(std::size_t point) const {
    check_point(point);
    std::vector<ProfileCurve> out;
    out.reserve(coll_.size());
    for (std::size_t r = 0; r < coll_.size(); ++r) {
      const RunLog& run = coll_[r];
      std::vector<double> hits(run.num_checkpoints());
      for (std::size_t k = 0; k < hits.size(); ++k) hits[k] = run.correct(k, point) ? 1.0 : 0.0;
      auto values = smooth_and_grid(coords_[r], hits, grid_, options_.sigma);
      for (double& v : values) v = std::clamp(v, 0.0, 1.0);
      out.push_back(ProfileCurve{grid_, std::move(values), ProfileKind::kAccuracy});
    }
    return out;
  }

  SoftmaxProfile softmax(std::size_t point) const {
    check_point(point);
    const std::size_t classes = coll_.num_classes();
    SoftmaxProfile out{grid_, classes, std::vector<double>(grid_.size() * classes, 0.0)};
    std::vector<double> run_profile(grid_.size() * classes);
    for (std::size_t r = 0; r < coll_.size(); ++r) {
      const RunLog& run = coll_[r];
      std::vector<double> channel(run.num_checkpoints());
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t k = 0; k < channel.size(); ++k) channel[k] = run.row(k, point)[c];
        const auto gridded = smooth_and_grid(coords_[r], channel, grid_, options_.sigma);
        for (std::size_t i = 0; i < grid_.size(); ++i) run_profile[i * classes + c] = std::max(0.0, gridded[i]);
      }
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) sum += run_profile[i * classes + c];
        for (std::size_t c = 0; c < classes; ++c) run_profile[i * classes + c] /= sum;
      }
      for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] += run_profile[j];
    }
    const double runs = static_cast<double>(coll_.size());
    for (double& v : out.data) v /= runs;
    return out;
  }

  ProfileCurve entropy(std::size_t point) const {
    check_point(point);
    const double ceiling = std::log(static_cast<double>(coll_.num_classes()));
    std::vector<ProfileCurve> runs;
    runs.reserve(coll_.size());
    for (std::size_t r = 0; r < coll_.size(); ++r) {
      const RunLog& run = coll_[r];
      std::vector<double> h(run.num_checkpoints());
      for (std::size_t k = 0; k < h.size(); ++k) h[k] = shannon_entropy(run.row(k, point));
      auto values = smooth_and_grid(coords_[r], h, grid_, options_.sigma);
      for (double& v : values) v = std::clamp(v, 0.0, ceiling);
      runs.push_back(ProfileCurve{grid_, std::move(values), ProfileKind::kEntropy});
    }
    return mean_curve(runs, ProfileKind::kEntropy);
  }

  ProfileCurve soft_accuracy(std::size_t point) const {
    const SoftmaxProfile sp = softmax(point);
    const std::uint32_t label = coll_.labels()[point];
    ProfileCurve out{grid_, std::vector<double>(grid_.size()), ProfileKind::kSoftAccuracy};
    for (std::size_t i = 0; i < grid_.size(); ++i) out.values[i] = sp.at(i)[label];
    return out;
  }

 private:
  void check_point(std::size_t point) const {
    if (point >= coll_.num_points()) {
      profile_engine::fail("point index " + std::to_string(point) + " out of range [0, " +
                           std::to_string(coll_.num_points()) + ")");
    }
  }

  ProfileCurve mean_curve(const std::vector<ProfileCurve>& runs, ProfileKind kind) const {
    ProfileCurve out{grid_, std::vector<double>(grid_.size(), 0.0), kind};
    for (const auto& run : runs) {
      for (std::size_t i = 0; i < grid_.size(); ++i) out.values[i] += run.values[i];
    }
    for (double& v : out.values) v /= static_cast<double>(runs.size());
    return out;
  }

  const RunCollection& coll_;
  ProfileOptions options_;
  AccuracyGrid grid_;
  std::vector<std::vector<double>> coords_;
};

inline ProfileCurve accuracy_profile(const RunCollection& coll, std::size_t point, const AccuracyGrid& grid,
                                     ProfileOptions options = {}) {
  return Profiler(coll, grid, options).accuracy(point);
}

inline SoftmaxProfile softmax_profile(const RunCollection& coll, std::size_t point, const AccuracyGrid& grid,
                                      ProfileOptions options = {}) {
  return Profiler(coll, grid, options).softmax(point);
}

inline ProfileCurve entropy_profile(const RunCollection& coll, std::size_t point, const AccuracyGrid& grid,
                                    ProfileOptions options = {}) {
  return Profiler(coll, grid, options).entropy(point);
}

inline ProfileCurve soft_accuracy_profile(const RunCollection& coll, std::size_t point,
                                          const AccuracyGrid& grid, ProfileOptions options = {}) {
  return Profiler(coll, grid, options).soft_accuracy(point);
}

inline void write_csv(std::ostream& out, const ProfileCurve& curve) {
  out << "p,value\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << format_double(curve.grid[i]) << ',' << format_double(curve.values[i]) << '\n';
  }
}

inline void write_csv(std::ostream& out, const SoftmaxProfile& profile) {
  out << 'p';
  for (std::size_t c = 0; c < profile.num_classes; ++c) out << ",class_" << c;
  out << '\n';
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    out << format_double(profile.grid[i]);
    for (double v : profile.at(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace profilekit
