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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/error.hpp"
#include "profilekit/normal.hpp"
#include "profilekit/parallel.hpp"
#include "profilekit/profile.hpp"
#include "profilekit/scoring.hpp"

namespace profilekit {

namespace negset {
inline constexpr std::string_view kModule = "negset";
inline constexpr double kProbitClamp = 1e-6;
[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }
}  // namespace negset

struct NegSetEntry {
  std::size_t point_id = 0;
  std::uint32_t label = 0;
  double score = 0.0;

  friend bool operator==(const NegSetEntry&, const NegSetEntry&) = default;
};

struct NegSetManifest {
  std::vector<NegSetEntry> selected;  // grouped by class, best score first
  std::size_t per_class_k = 0;
  std::string filter_name;
  std::string provenance;
};

struct Candidate {
  std::size_t point_id = 0;
  std::uint32_t label = 0;
  double score = 0.0;
  bool passes_filter = true;
};

struct CorrelationReport {
  std::vector<std::pair<double, double>> pairs;  // (reference accuracy, subset accuracy)
  double pearson_r = 0.0;
  double slope = 0.0;
};

/// Non-monotonicity of the accuracy profile of each listed point. With
/// `per_run`, each run's profile is scored separately and the scores averaged;
/// otherwise the run-averaged profile is scored.
inline std::vector<double> score_pool(const Profiler& profiler, std::span<const std::size_t> points,
                                      bool per_run = false) {
  if (points.empty()) negset::fail("candidate pool is empty");
  std::vector<double> scores(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    if (per_run) {
      double total = 0.0;
      const auto curves = profiler.per_run_accuracy(points[i]);
      for (const auto& c : curves) total += nmono(c);
      scores[i] = total / static_cast<double>(curves.size());
    } else {
      scores[i] = nmono(profiler.accuracy(points[i]));
    }
  });
  return scores;
}

inline std::vector<double> score_pool(const Profiler& profiler, bool per_run = false) {
  std::vector<std::size_t> all(profiler.collection().num_points());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return score_pool(profiler, all, per_run);
}

/// Top-k filtered candidates of every class by score; ties go to the lower
/// point_id. The result does not depend on candidate order.
inline NegSetManifest build_negset(std::span<const Candidate> candidates, std::size_t k, std::size_t num_classes,
                                   std::string filter_name = "mask", std::string provenance = "") {
  if (k == 0) negset::fail("per-class count k must be positive");
  if (num_classes == 0) negset::fail("number of classes must be positive");
  std::vector<Candidate> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.point_id < b.point_id; });
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i > 0 && pool[i].point_id == pool[i - 1].point_id) {
      negset::fail("point " + std::to_string(pool[i].point_id) + " listed twice");
    }
    if (pool[i].label >= num_classes) {
      negset::fail("point " + std::to_string(pool[i].point_id) + " has label " + std::to_string(pool[i].label) +
                   " outside [0, " + std::to_string(num_classes) + ")");
    }
    if (std::isnan(pool[i].score)) negset::fail("point " + std::to_string(pool[i].point_id) + " has a NaN score");
  }

  std::vector<std::vector<Candidate>> by_class(num_classes);
  for (const auto& c : pool) {
    if (c.passes_filter) by_class[c.label].push_back(c);
  }
  NegSetManifest out{{}, k, std::move(filter_name), std::move(provenance)};
  out.selected.reserve(k * num_classes);
  for (std::size_t cls = 0; cls < num_classes; ++cls) {
    auto& group = by_class[cls];
    if (group.size() < k) {
      negset::fail("class " + std::to_string(cls) + " has " + std::to_string(group.size()) +
                   " filtered candidates, short of k=" + std::to_string(k) + " by " + std::to_string(k - group.size()));
    }
    std::partial_sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(k), group.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.point_id < b.point_id;
                      });
    for (std::size_t i = 0; i < k; ++i) out.selected.push_back({group[i].point_id, group[i].label, group[i].score});
  }
  return out;
}

/// Convenience form over index-aligned arrays (point_id = position).
inline NegSetManifest build_negset(std::span<const double> scores, std::span<const std::uint32_t> labels,
                                   const std::vector<bool>& filter_mask, std::size_t k, std::size_t num_classes,
                                   std::string filter_name = "mask", std::string provenance = "") {
  if (scores.size() != labels.size() || scores.size() != filter_mask.size()) {
    negset::fail("scores, labels and filter mask differ in length");
  }
  std::vector<Candidate> candidates(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) candidates[i] = {i, labels[i], scores[i], filter_mask[i]};
  return build_negset(candidates, k, num_classes, std::move(filter_name), std::move(provenance));
}

inline double probit(double u) {
  return normal_quantile(std::clamp(u, negset::kProbitClamp, 1.0 - negset::kProbitClamp));
}

/// Pearson correlation and least-squares slope of y on x. A constant series
/// has no defined correlation; r is reported as 0 in that case.
inline std::pair<double, double> pearson_and_slope(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) negset::fail("no accuracy pairs to correlate");
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double r = (sxx > 0.0 && syy > 0.0) ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  return {r, slope};
}

/// Pairs every checkpoint's reference global accuracy with the accuracy of
/// the same checkpoint on the selected subset.
inline CorrelationReport evaluate_correlation(const NegSetManifest& manifest, const RunCollection& coll,
                                              const RunCollection& reference, bool probit_scale = false) {
  if (manifest.selected.empty()) negset::fail("manifest selects no points");
  for (const auto& e : manifest.selected) {
    if (e.point_id >= coll.num_points()) {
      negset::fail("manifest references unknown point_id " + std::to_string(e.point_id) + " (collection has " +
                   std::to_string(coll.num_points()) + " points)");
    }
    if (coll.labels()[e.point_id] != e.label) {
      negset::fail("manifest class " + std::to_string(e.label) + " of point " + std::to_string(e.point_id) +
                   " disagrees with the log label " + std::to_string(coll.labels()[e.point_id]));
    }
  }
  if (reference.size() != coll.size()) negset::fail("reference and subset collections differ in run count");
  CorrelationReport report;
  for (std::size_t r = 0; r < coll.size(); ++r) {
    if (reference[r].num_checkpoints() != coll[r].num_checkpoints()) {
      negset::fail("run " + std::to_string(r) + ": reference and subset logs differ in checkpoint count");
    }
    for (std::size_t k = 0; k < coll[r].num_checkpoints(); ++k) {
      std::size_t hits = 0;
      for (const auto& e : manifest.selected) hits += coll[r].correct(k, e.point_id) ? 1 : 0;
      double x = reference[r].checkpoints()[k].global_accuracy;
      double y = static_cast<double>(hits) / static_cast<double>(manifest.selected.size());
      if (probit_scale) {
        x = probit(x);
        y = probit(y);
      }
      report.pairs.emplace_back(x, y);
    }
  }
  std::tie(report.pearson_r, report.slope) = pearson_and_slope(report.pairs);
  return report;
}

inline nlohmann::json to_json(const NegSetManifest& m) {
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& e : m.selected) selected.push_back({{"point_id", e.point_id}, {"class", e.label}, {"score", e.score}});
  nlohmann::json out{{"per_class_k", m.per_class_k}, {"filter_name", m.filter_name}, {"selected", selected}};
  if (!m.provenance.empty()) out["provenance"] = m.provenance;
  return out;
}

inline NegSetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    NegSetManifest m;
    m.per_class_k = j.at("per_class_k").get<std::size_t>();
    m.filter_name = j.at("filter_name").get<std::string>();
    m.provenance = j.value("provenance", std::string());
    for (const auto& e : j.at("selected")) {
      m.selected.push_back(
          {e.at("point_id").get<std::size_t>(), e.at("class").get<std::uint32_t>(), e.at("score").get<double>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    negset::fail(std::string("malformed manifest: ") + e.what());
  }
}

inline nlohmann::json to_json(const CorrelationReport& r) { return {{"pearson_r", r.pearson_r}, {"slope", r.slope}}; }

inline void write_csv(std::ostream& out, const CorrelationReport& r) {
  out << "p,subset_accuracy\n";
  for (const auto& [x, y] : r.pairs) out << format_double(x) << ',' << format_double(y) << '\n';
}

/// Reads `point_id,0|1` lines (optional header). Every point in
/// [0, num_points) must appear exactly once.
inline std::vector<bool> read_filter_mask(const std::filesystem::path& path, std::size_t num_points) {
  std::ifstream in(path);
  if (!in) negset::fail("cannot open filter mask " + path.string());
  std::vector<int> seen(num_points, -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = logstore::detail::trim(line);
    if (text.empty()) continue;
    const auto fields = logstore::detail::split(text, ',');
    std::size_t id = 0;
    int flag = 0;
    const bool ok = fields.size() == 2 && logstore::detail::parse_number(fields[0], id) &&
                    logstore::detail::parse_number(fields[1], flag) && (flag == 0 || flag == 1);
    if (!ok) {
      if (line_no == 1) continue;  // header
      negset::fail(path.filename().string() + " line " + std::to_string(line_no) + ": expected point_id,0|1");
    }
    if (id >= num_points) negset::fail("filter mask names point " + std::to_string(id) + " outside the pool");
    if (seen[id] != -1) negset::fail("filter mask lists point " + std::to_string(id) + " twice");
    seen[id] = flag;
  }
  std::vector<bool> mask(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    if (seen[i] == -1) negset::fail("filter mask has no entry for point " + std::to_string(i));
    mask[i] = seen[i] == 1;
  }
  return mask;
}

}  // namespace profilekit
