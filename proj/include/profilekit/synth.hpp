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
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "profilekit/logstore.hpp"

namespace profilekit::synth {

/// Target pointwise accuracy of point z at scheduled global accuracy p.
using TargetProfile = std::function<double(std::size_t point, double p)>;

/// Softmax row with `confidence` on `top` and the rest spread evenly.
inline void fill_row(std::span<float> row, std::size_t top, float confidence) {
  const float rest = row.size() > 1 ? (1.0f - confidence) / static_cast<float>(row.size() - 1) : 0.0f;
  std::fill(row.begin(), row.end(), rest);
  row[top] = row.size() > 1 ? confidence : 1.0f;
}

/// One run of a latent-threshold model: each point draws u ~ U(0,1) once per
/// run and is classified correctly at checkpoint k iff
/// u < target(z, schedule[k]) + noise, noise ~ U(-noise_amplitude, noise_amplitude).
/// A monotone target therefore yields a monotone correctness sequence.
template <typename Rng>
RunLog threshold_run(std::string run_id, std::span<const std::uint32_t> labels, std::size_t num_classes,
                     std::span<const double> schedule, const TargetProfile& target, double noise_amplitude,
                     Rng& rng, float confidence = 0.7f) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-noise_amplitude, noise_amplitude);
  const std::size_t n = labels.size();
  std::vector<double> threshold(n);
  for (double& u : threshold) u = unit(rng);
  std::vector<Checkpoint> checkpoints(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    auto& ckpt = checkpoints[k];
    ckpt.resource = static_cast<double>(k + 1);
    ckpt.softmax.resize(n * num_classes);
    for (std::size_t z = 0; z < n; ++z) {
      const double eps = noise_amplitude > 0.0 ? noise(rng) : 0.0;
      const bool correct = threshold[z] < std::clamp(target(z, schedule[k]) + eps, 0.0, 1.0);
      const std::size_t top = correct ? labels[z] : (labels[z] + 1) % num_classes;
      fill_row(std::span<float>(ckpt.softmax).subspan(z * num_classes, num_classes), top, confidence);
    }
  }
  return RunLog(std::move(run_id), n, num_classes, std::vector<std::uint32_t>(labels.begin(), labels.end()),
                std::move(checkpoints));
}

struct NegScenario {
  RunCollection pool;
  RunCollection reference;
  std::vector<std::size_t> planted;  // sorted point ids following 1 - p
};

struct NegScenarioConfig {
  std::size_t runs = 10;
  std::size_t checkpoints = 40;
  std::size_t pool_points = 2000;
  std::size_t reference_points = 1000;
  std::size_t num_classes = 10;
  std::size_t planted = 100;  // spread evenly over classes
  double noise_amplitude = 0.02;
  double p_start = 0.15;
  double p_end = 0.85;
  std::uint64_t seed = 7;
};

/// A pool where `planted` points follow the profile 1 - p and all others
/// follow p, together with an in-distribution reference set following p.
inline NegScenario make_neg_scenario(const NegScenarioConfig& cfg = {}) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint32_t> pool_labels(cfg.pool_points), ref_labels(cfg.reference_points);
  for (std::size_t z = 0; z < pool_labels.size(); ++z) pool_labels[z] = static_cast<std::uint32_t>(z % cfg.num_classes);
  for (std::size_t z = 0; z < ref_labels.size(); ++z) ref_labels[z] = static_cast<std::uint32_t>(z % cfg.num_classes);

  std::vector<bool> is_planted(cfg.pool_points, false);
  std::vector<std::size_t> planted;
  const std::size_t per_class = cfg.planted / cfg.num_classes;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t z = c; z < cfg.pool_points; z += cfg.num_classes) members.push_back(z);
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < std::min(per_class, members.size()); ++i) {
      is_planted[members[i]] = true;
      planted.push_back(members[i]);
    }
  }
  std::sort(planted.begin(), planted.end());

  const TargetProfile compatible = [](std::size_t, double p) { return p; };
  const TargetProfile pool_target = [&is_planted](std::size_t z, double p) { return is_planted[z] ? 1.0 - p : p; };
  std::uniform_real_distribution<double> offset(-0.03, 0.03);
  std::vector<RunLog> pool_runs, ref_runs;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const double shift = offset(rng);
    std::vector<double> schedule(cfg.checkpoints);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const double t = schedule.size() > 1 ? static_cast<double>(k) / static_cast<double>(schedule.size() - 1) : 0.0;
      schedule[k] = std::clamp(cfg.p_start + (cfg.p_end - cfg.p_start) * t + shift, 0.0, 1.0);
    }
    ref_runs.push_back(threshold_run("reference-" + std::to_string(r), ref_labels, cfg.num_classes, schedule,
                                     compatible, cfg.noise_amplitude, rng));
    pool_runs.push_back(threshold_run("pool-" + std::to_string(r), pool_labels, cfg.num_classes, schedule, pool_target,
                                      cfg.noise_amplitude, rng));
  }
  return {RunCollection(std::move(pool_runs)), RunCollection(std::move(ref_runs)), std::move(planted)};
}

}  // namespace profilekit::synth
