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

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/error.hpp"
#include "profilekit/parallel.hpp"
#include "profilekit/profile.hpp"

namespace profilekit {

namespace scoring {
inline constexpr std::string_view kModule = "scoring";
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }
}  // namespace scoring

enum class Taxon { kEasy, kHard, kCompatible, kNonMonotone };

inline constexpr std::array<Taxon, 4> kAllTaxa = {Taxon::kEasy, Taxon::kHard, Taxon::kCompatible,
                                                  Taxon::kNonMonotone};

inline const char* to_string(Taxon t) {
  switch (t) {
    case Taxon::kEasy: return "Easy";
    case Taxon::kHard: return "Hard";
    case Taxon::kCompatible: return "Compatible";
    case Taxon::kNonMonotone: return "NonMonotone";
  }
  return "unknown";
}

struct TaxonomyConfig {
  double nmono_threshold = 0.1;

  void validate() const {
    if (!(nmono_threshold >= 0.0)) scoring::fail("non-monotonicity threshold must be non-negative");
  }
};

struct TemplateDistances {
  double easy = 0.0;
  double hard = 0.0;
  double compatible = 0.0;
};

struct TaxonomyLabel {
  Taxon label = Taxon::kCompatible;
  double nmono_score = 0.0;
  TemplateDistances template_distances;
};

/// Total negative variation of a sampled curve: the sum of all drops between
/// consecutive samples. Zero iff the samples never decrease.
inline double nmono(std::span<const double> values) {
  if (values.size() < 2) scoring::fail("non-monotonicity needs at least 2 grid points");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) total += std::max(0.0, values[i] - values[i + 1]);
  return total;
}

inline double nmono(const ProfileCurve& curve) { return nmono(curve.values); }

/// Root-mean-square distance of a curve to the constant-1, constant-0 and
/// identity templates, all evaluated at the curve's own grid coordinates.
inline TemplateDistances template_distances(const ProfileCurve& curve) {
  double easy = 0.0, hard = 0.0, compatible = 0.0;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double v = curve.values[i];
    easy += (v - 1.0) * (v - 1.0);
    hard += v * v;
    compatible += (v - curve.grid[i]) * (v - curve.grid[i]);
  }
  const double n = static_cast<double>(curve.values.size());
  return {std::sqrt(easy / n), std::sqrt(hard / n), std::sqrt(compatible / n)};
}

/// Non-monotone above the threshold, otherwise the nearest template.
/// Exact template ties resolve Compatible, then Easy, then Hard.
inline TaxonomyLabel classify(const ProfileCurve& curve, const TaxonomyConfig& cfg = {}) {
  cfg.validate();
  if (curve.kind != ProfileKind::kAccuracy) scoring::fail("taxonomy is defined on accuracy profiles only");
  TaxonomyLabel out;
  out.nmono_score = nmono(curve);
  out.template_distances = template_distances(curve);
  if (out.nmono_score > cfg.nmono_threshold) {
    out.label = Taxon::kNonMonotone;
    return out;
  }
  const auto& d = out.template_distances;
  out.label = Taxon::kCompatible;
  double best = d.compatible;
  if (d.easy < best) {
    out.label = Taxon::kEasy;
    best = d.easy;
  }
  if (d.hard < best) out.label = Taxon::kHard;
  return out;
}

struct Decomposition {
  std::vector<TaxonomyLabel> points;
  std::array<std::size_t, 4> counts{};  // indexed by Taxon

  std::size_t count(Taxon t) const { return counts[static_cast<std::size_t>(t)]; }
};

/// Classifies the accuracy profile of every point of the profiler's collection.
inline Decomposition decompose(const Profiler& profiler, const TaxonomyConfig& cfg = {}) {
  cfg.validate();
  Decomposition out;
  out.points.resize(profiler.collection().num_points());
  parallel_for(out.points.size(), [&](std::size_t i) { out.points[i] = classify(profiler.accuracy(i), cfg); });
  for (const auto& p : out.points) ++out.counts[static_cast<std::size_t>(p.label)];
  return out;
}

inline Decomposition decompose(const RunCollection& coll, const AccuracyGrid& grid,
                               const TaxonomyConfig& cfg = {}, ProfileOptions options = {}) {
  return decompose(Profiler(coll, grid, options), cfg);
}

inline void write_csv(std::ostream& out, const Decomposition& d) {
  out << "point_id,label,nmono,rms_easy,rms_hard,rms_compatible\n";
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    const auto& p = d.points[i];
    out << i << ',' << to_string(p.label) << ',' << format_double(p.nmono_score) << ','
        << format_double(p.template_distances.easy) << ',' << format_double(p.template_distances.hard) << ','
        << format_double(p.template_distances.compatible) << '\n';
  }
}

inline nlohmann::json summary_json(const Decomposition& d, const TaxonomyConfig& cfg) {
  nlohmann::json counts = nlohmann::json::object();
  for (Taxon t : kAllTaxa) counts[to_string(t)] = d.count(t);
  return {{"num_points", d.points.size()}, {"nmono_threshold", cfg.nmono_threshold}, {"counts", counts}};
}

}  // namespace profilekit
