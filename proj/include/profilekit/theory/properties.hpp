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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/error.hpp"

namespace profilekit::theory {

inline constexpr std::string_view kModule = "theory-lab";
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }

/// Pointwise accuracies, one row per model and one column per point.
class AccuracyTable {
 public:
  AccuracyTable(std::size_t models, std::size_t points, std::vector<double> values)
      : models_(models), points_(points), values_(std::move(values)) {
    if (values_.size() != models * points) fail("accuracy table size does not match its shape");
  }

  std::size_t models() const noexcept { return models_; }
  std::size_t points() const noexcept { return points_; }
  double operator()(std::size_t model, std::size_t point) const { return values_[model * points_ + point]; }

 private:
  std::size_t models_;
  std::size_t points_;
  std::vector<double> values_;
};

/// Model `model_a` ranks `point_a` strictly above `point_b`, while `model_b`
/// ranks it strictly below.
struct UniversalityWitness {
  std::size_t model_a = 0;
  std::size_t model_b = 0;
  std::size_t point_a = 0;
  std::size_t point_b = 0;
};

struct UniversalityReport {
  bool pass = true;
  std::optional<UniversalityWitness> witness;
};

/// Accuracy of `point` drops between resource step `step` and `step + 1`.
struct MonotonicityWitness {
  std::size_t point = 0;
  std::size_t step = 0;
  double before = 0.0;
  double after = 0.0;
};

struct MonotonicityReport {
  bool pass = true;
  std::optional<MonotonicityWitness> witness;
};

/// Every model must order every pair of points the same way (ties are
/// compatible with either order). Exhaustive scan over point pairs.
inline UniversalityReport check_universality(const AccuracyTable& table) {
  const std::size_t m = table.models();
  const std::size_t n = table.points();
  // Column-major copy so the inner loop over models is contiguous.
  std::vector<double> by_point(m * n);
  for (std::size_t f = 0; f < m; ++f) {
    for (std::size_t z = 0; z < n; ++z) by_point[z * m + f] = table(f, z);
  }
  for (std::size_t a = 0; a < n; ++a) {
    const double* ra = &by_point[a * m];
    for (std::size_t b = a + 1; b < n; ++b) {
      const double* rb = &by_point[b * m];
      std::optional<std::size_t> above, below;
      for (std::size_t f = 0; f < m; ++f) {
        if (ra[f] > rb[f]) {
          if (!above) above = f;
        } else if (ra[f] < rb[f]) {
          if (!below) below = f;
        }
        if (above && below) return {false, UniversalityWitness{*above, *below, a, b}};
      }
    }
  }
  return {};
}

/// Every point's accuracy must be non-decreasing when the models are visited
/// in `resource_order` (a permutation of model indices, weakest first).
inline MonotonicityReport check_accuracy_monotonicity(const AccuracyTable& table,
                                                      std::span<const std::size_t> resource_order) {
  if (resource_order.size() != table.models()) fail("resource order must list every model once");
  std::vector<bool> seen(table.models(), false);
  for (std::size_t f : resource_order) {
    if (f >= table.models() || seen[f]) fail("resource order is not a permutation of the models");
    seen[f] = true;
  }
  for (std::size_t z = 0; z < table.points(); ++z) {
    for (std::size_t s = 0; s + 1 < resource_order.size(); ++s) {
      const double before = table(resource_order[s], z);
      const double after = table(resource_order[s + 1], z);
      if (after < before) return {false, MonotonicityWitness{z, s, before, after}};
    }
  }
  return {};
}

inline nlohmann::json to_json(const UniversalityReport& r) {
  nlohmann::json out{{"property", "universality_of_instance_difficulty"}, {"pass", r.pass}};
  if (r.witness) {
    out["witness"] = {{"model_a", r.witness->model_a},
                      {"model_b", r.witness->model_b},
                      {"point_a", r.witness->point_a},
                      {"point_b", r.witness->point_b}};
  }
  return out;
}

inline nlohmann::json to_json(const MonotonicityReport& r) {
  nlohmann::json out{{"property", "accuracy_monotonicity"}, {"pass", r.pass}};
  if (r.witness) {
    out["witness"] = {{"point", r.witness->point},
                      {"step", r.witness->step},
                      {"before", r.witness->before},
                      {"after", r.witness->after}};
  }
  return out;
}

}  // namespace profilekit::theory
