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
#include <numeric>
#include <vector>

#include "profilekit/normal.hpp"
#include "profilekit/theory/properties.hpp"

namespace profilekit::theory {

/// Skill-vs-difficulty model: a classifier of skill s succeeds on a point of
/// difficulty d with probability Phi(s - d).
struct SkillModel {
  std::vector<double> skills;
  std::vector<double> difficulties;

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(skills.begin(), skills.end(), finite) ||
        !std::all_of(difficulties.begin(), difficulties.end(), finite)) {
      fail("skill model parameters must be finite");
    }
  }
};

inline double skill_accuracy(const SkillModel& model, std::size_t skill, std::size_t point) {
  if (skill >= model.skills.size()) fail("skill index " + std::to_string(skill) + " out of range");
  if (point >= model.difficulties.size()) fail("point index " + std::to_string(point) + " out of range");
  return normal_cdf(model.skills[skill] - model.difficulties[point]);
}

inline AccuracyTable accuracy_table(const SkillModel& model) {
  model.validate();
  const std::size_t m = model.skills.size();
  const std::size_t n = model.difficulties.size();
  std::vector<double> values(m * n);
  for (std::size_t f = 0; f < m; ++f) {
    for (std::size_t z = 0; z < n; ++z) values[f * n + z] = normal_cdf(model.skills[f] - model.difficulties[z]);
  }
  return AccuracyTable(m, n, std::move(values));
}

inline UniversalityReport check_universality(const SkillModel& model) {
  return check_universality(accuracy_table(model));
}

/// Model indices ordered by increasing skill (stable).
inline std::vector<std::size_t> skill_order(const SkillModel& model) {
  std::vector<std::size_t> order(model.skills.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return model.skills[a] < model.skills[b]; });
  return order;
}

}  // namespace profilekit::theory
