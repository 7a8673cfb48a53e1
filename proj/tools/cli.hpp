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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "profilekit/profilekit.hpp"

namespace profilekit::cli {

namespace fs = std::filesystem;

[[noreturn]] inline void fail(const std::string& message) { throw Error("cli", message); }

namespace detail {

inline RunCollection load(const std::vector<std::string>& paths) {
  std::vector<fs::path> p(paths.begin(), paths.end());
  return load_collection(p);
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) fail("cannot write " + path);
  write(file);
  if (!file) fail("error while writing " + path);
}

inline void emit_plot(const std::string& path, PlotKind kind, const std::string& csv, const std::string& title) {
  if (path.empty()) return;
  std::istringstream in(csv);
  PlotSpec spec;
  spec.kind = kind;
  spec.title = title;
  const std::string svg = emit_svg(spec, parse_csv(in));
  std::ofstream file(path, std::ios::binary);
  if (!file) fail("cannot write " + path);
  file << svg;
}

/// Accuracy range shared by every collection.
inline AccuracyGrid shared_grid(const std::vector<const RunCollection*>& colls, std::size_t size) {
  double lo = -1.0, hi = 2.0;
  for (const RunCollection* c : colls) {
    const AccuracyGrid g = default_grid(*c, size);
    lo = std::max(lo, g.p_min());
    hi = std::min(hi, g.p_max());
  }
  if (!(hi - lo >= profile_engine::kMinSpan)) fail("the collections' accuracy ranges do not overlap");
  return AccuracyGrid(lo, hi, size);
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (auto field : logstore::detail::split(text, ',')) {
    double v = 0.0;
    if (!logstore::detail::parse_number(logstore::detail::trim(field), v)) fail("bad number list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

inline std::string config_token(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Splices flags from a JSON config object into the argument list. Flags
/// given on the command line win over the config file.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  std::ifstream in(*config);
  if (!in) fail("cannot open config file " + *config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("malformed config file " + *config + ": " + e.what());
  }
  if (!j.is_object()) fail("config file must hold a JSON object of flags");
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) rest.push_back(flag);
    } else if (value.is_array()) {
      rest.push_back(flag);
      for (const auto& v : value) rest.push_back(config_token(v));
    } else {
      rest.push_back(flag);
      rest.push_back(config_token(value));
    }
  }
  return rest;
}

}  // namespace detail

struct ProfileFlags {
  std::size_t grid_size = AccuracyGrid::kDefaultSize;
  double sigma = 2.0;
  bool raw = false;

  void add_to(CLI::App* app) {
    app->add_option("--grid-size", grid_size, "Number of accuracy grid points")->capture_default_str();
    app->add_option("--sigma", sigma, "Gaussian smoothing width in checkpoints")->capture_default_str();
    app->add_flag("--raw", raw, "Skip smoothing (diagnostic)");
  }
  ProfileOptions options() const { return {raw ? 0.0 : sigma, grid_size}; }
};

/// Runs the command line; returns the process exit code (0 success,
/// 1 validation error, 2 usage error).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-profile analysis toolkit", "profilekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "profilekit 0.1.0");
  app.set_config();  // disables CLI11's own config handling; --config is JSON
  std::string unused_config;
  app.add_option("--config", unused_config, "JSON file supplying any flag");

  // validate
  std::vector<std::string> validate_logs;
  auto* validate = app.add_subcommand("validate", "Check logs and print their shape");
  validate->add_option("logs", validate_logs, "Log directories or manifest files")->required();

  // profile
  std::vector<std::string> profile_logs, profile_ref;
  std::size_t profile_point = 0;
  std::string profile_kind = "acc", profile_out, profile_svg;
  ProfileFlags profile_flags;
  auto* profile = app.add_subcommand("profile", "Learning profile of one point");
  profile->add_option("--log", profile_logs, "Run logs to merge")->required();
  profile->add_option("--reference", profile_ref, "Runs supplying the accuracy axis");
  profile->add_option("--point", profile_point, "Point index")->required();
  profile->add_option("--kind", profile_kind, "acc, softmax, entropy or softacc")
      ->check(CLI::IsMember({"acc", "softmax", "entropy", "softacc"}))
      ->capture_default_str();
  profile->add_option("--out", profile_out, "CSV output (default stdout)");
  profile->add_option("--svg", profile_svg, "Also render an SVG");
  profile_flags.add_to(profile);

  // taxonomy
  std::vector<std::string> tax_logs, tax_ref;
  double tax_threshold = 0.1;
  std::string tax_out, tax_summary, tax_svg;
  ProfileFlags tax_flags;
  auto* taxonomy = app.add_subcommand("taxonomy", "Classify every point's accuracy profile");
  taxonomy->add_option("--log", tax_logs, "Run logs to merge")->required();
  taxonomy->add_option("--reference", tax_ref, "Runs supplying the accuracy axis");
  taxonomy->add_option("--threshold", tax_threshold, "Non-monotonicity threshold")->capture_default_str();
  taxonomy->add_option("--out", tax_out, "Per-point CSV (default stdout)");
  taxonomy->add_option("--summary", tax_summary, "JSON count summary");
  taxonomy->add_option("--svg", tax_svg, "Pie chart of the counts");
  tax_flags.add_to(taxonomy);

  // distance
  std::vector<std::string> dist_a, dist_b, dist_families;
  std::string dist_metric = "tv", dist_out, dist_svg;
  std::vector<std::size_t> dist_points;
  ProfileFlags dist_flags;
  auto* distance = app.add_subcommand("distance", "Softmax-profile distance between training procedures");
  distance->add_option("--a", dist_a, "Runs of the first procedure");
  distance->add_option("--b", dist_b, "Runs of the second procedure");
  distance->add_option("--family", dist_families, "name=dir,dir,... (repeatable) for a distance matrix");
  distance->add_option("--metric", dist_metric, "tv, kl or cosine")
      ->check(CLI::IsMember({"tv", "kl", "cosine"}))
      ->capture_default_str();
  distance->add_option("--points", dist_points, "Restrict to these point indices");
  distance->add_option("--out", dist_out, "JSON (pair) or CSV (matrix) output");
  distance->add_option("--svg", dist_svg, "Heatmap of the matrix");
  dist_flags.add_to(distance);

  // gap
  std::vector<std::string> gap_a, gap_b;
  std::string gap_out, gap_svg;
  ProfileFlags gap_flags;
  auto* gap = app.add_subcommand("gap", "Mean absolute accuracy-profile difference");
  gap->add_option("--a", gap_a, "Runs of the first procedure")->required();
  gap->add_option("--b", gap_b, "Runs of the second procedure")->required();
  gap->add_option("--out", gap_out, "CSV output (default stdout)");
  gap->add_option("--svg", gap_svg, "Curve plot");
  gap_flags.add_to(gap);

  // negset
  std::vector<std::string> neg_pool, neg_ref;
  std::string neg_filter, neg_out, neg_scores, neg_provenance;
  std::size_t neg_k = 100;
  bool neg_per_run = false;
  ProfileFlags neg_flags;
  auto* negset_cmd = app.add_subcommand("negset", "Select the most non-monotone points per class");
  negset_cmd->add_option("--pool", neg_pool, "Candidate pool runs")->required();
  negset_cmd->add_option("--reference", neg_ref, "In-distribution runs supplying the accuracy axis")->required();
  negset_cmd->add_option("--filter", neg_filter, "point_id,0|1 mask (default: keep all)");
  negset_cmd->add_option("--k", neg_k, "Points per class")->capture_default_str();
  negset_cmd->add_flag("--per-run", neg_per_run, "Average per-run scores instead of scoring the mean profile");
  negset_cmd->add_option("--provenance", neg_provenance, "Pool identifier recorded in the manifest");
  negset_cmd->add_option("--out", neg_out, "Manifest JSON (default stdout)");
  negset_cmd->add_option("--scores", neg_scores, "Per-point score CSV");
  neg_flags.add_to(negset_cmd);

  // negset-eval
  std::vector<std::string> eval_logs, eval_ref;
  std::string eval_manifest, eval_out, eval_report, eval_svg;
  bool eval_probit = false;
  auto* negset_eval = app.add_subcommand("negset-eval", "Correlate subset accuracy with reference accuracy");
  negset_eval->add_option("--manifest", eval_manifest, "Manifest JSON")->required();
  negset_eval->add_option("--log", eval_logs, "Runs evaluated on the pool")->required();
  negset_eval->add_option("--reference", eval_ref, "Runs evaluated on the reference set")->required();
  negset_eval->add_flag("--probit", eval_probit, "Probit-scale both axes");
  negset_eval->add_option("--out", eval_out, "Pairs CSV");
  negset_eval->add_option("--report", eval_report, "JSON report (default stdout)");
  negset_eval->add_option("--svg", eval_svg, "Scatter plot");

  // theory
  auto* theory_cmd = app.add_subcommand("theory", "Property checks on the abstract learning models");
  theory_cmd->require_subcommand(1);
  std::uint64_t seed = 1;
  std::string theory_out;
  theory_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  theory_cmd->add_option("--out", theory_out, "JSON report (default stdout)");

  std::size_t skill_models = 100, skill_count = 100, skill_points = 200;
  auto* skill = theory_cmd->add_subcommand("skill", "Universality and monotonicity of random skill models");
  skill->add_option("--models", skill_models, "Number of random models")->capture_default_str();
  skill->add_option("--skills", skill_count, "Skills per model")->capture_default_str();
  skill->add_option("--points", skill_points, "Difficulties per model")->capture_default_str();

  std::size_t mf_dim = 1, mf_samples = 0;
  double mf_lipschitz = 1.0;
  std::string mf_cells = "2,4,8,16,32";
  auto* manifold = theory_cmd->add_subcommand("manifold", "Error scaling of cell-wise regression");
  manifold->add_option("--dimension", mf_dim, "Input dimension")->capture_default_str();
  manifold->add_option("--lipschitz", mf_lipschitz, "Lipschitz constant of the target")->capture_default_str();
  manifold->add_option("--cells", mf_cells, "Cells per axis, comma separated")->capture_default_str();
  manifold->add_option("--samples-per-axis", mf_samples, "Evaluation lattice size (default by dimension)");

  std::size_t by_models = 100, by_labels = 3, by_alphabet = 2, by_horizon = 6, by_samples = 200000;
  auto* bayes = theory_cmd->add_subcommand("bayes", "Expected entropy and max-probability of Bayes posteriors");
  bayes->add_option("--models", by_models, "Number of random joint tables")->capture_default_str();
  bayes->add_option("--labels", by_labels, "Label alphabet size")->capture_default_str();
  bayes->add_option("--alphabet", by_alphabet, "Observation alphabet size")->capture_default_str();
  bayes->add_option("--horizon", by_horizon, "Number of observations")->capture_default_str();
  bayes->add_option("--samples", by_samples, "Monte Carlo samples above the enumeration limit")
      ->capture_default_str();

  std::size_t gp_train = 8, gp_queries = 10;
  double gp_lengthscale = 1.0, gp_variance = 1.0;
  auto* gp = theory_cmd->add_subcommand("gp", "Posterior variance as difficulty under an RBF Gaussian process");
  gp->add_option("--train", gp_train, "Training points")->capture_default_str();
  gp->add_option("--queries", gp_queries, "Query points")->capture_default_str();
  gp->add_option("--lengthscale", gp_lengthscale, "RBF lengthscale")->capture_default_str();
  gp->add_option("--variance", gp_variance, "RBF variance")->capture_default_str();

  // plot
  std::string plot_spec, plot_data, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render CSV data to SVG");
  plot_cmd->add_option("--spec", plot_spec, "Plot spec JSON")->required();
  plot_cmd->add_option("--data", plot_data, "CSV data")->required();
  plot_cmd->add_option("--out", plot_out, "SVG output (default stdout)");

  // synth
  std::string synth_out;
  synth::NegScenarioConfig synth_cfg;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic pool/reference log pair");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--runs", synth_cfg.runs)->capture_default_str();
  synth_cmd->add_option("--checkpoints", synth_cfg.checkpoints)->capture_default_str();
  synth_cmd->add_option("--pool-points", synth_cfg.pool_points)->capture_default_str();
  synth_cmd->add_option("--reference-points", synth_cfg.reference_points)->capture_default_str();
  synth_cmd->add_option("--classes", synth_cfg.num_classes)->capture_default_str();
  synth_cmd->add_option("--planted", synth_cfg.planted)->capture_default_str();
  synth_cmd->add_option("--noise", synth_cfg.noise_amplitude)->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed)->capture_default_str();

  try {
    args = detail::expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 2;
  }

  try {
    if (*validate) {
      for (const auto& path : validate_logs) {
        const RunLog log = load_log(path);
        out << "ok " << path << ": run '" << log.run_id() << "', " << log.num_points() << " points, "
            << log.num_classes() << " classes, " << log.num_checkpoints() << " checkpoints\n";
      }
      if (validate_logs.size() > 1) {
        detail::load(validate_logs);
        out << "ok: " << validate_logs.size() << " runs are mutually compatible\n";
      }
    } else if (*profile) {
      const RunCollection coll = detail::load(profile_logs);
      const std::optional<RunCollection> ref =
          profile_ref.empty() ? std::nullopt : std::optional<RunCollection>(detail::load(profile_ref));
      const Profiler prof(coll, ref ? *ref : coll, std::nullopt, profile_flags.options());
      std::ostringstream csv;
      PlotKind kind = PlotKind::kCurve;
      if (profile_kind == "acc") {
        write_csv(csv, prof.accuracy(profile_point));
      } else if (profile_kind == "softmax") {
        write_csv(csv, prof.softmax(profile_point));
        kind = PlotKind::kStackplot;
      } else if (profile_kind == "entropy") {
        write_csv(csv, prof.entropy(profile_point));
      } else {
        write_csv(csv, prof.soft_accuracy(profile_point));
      }
      detail::emit(profile_out, out, [&](std::ostream& o) { o << csv.str(); });
      detail::emit_plot(profile_svg, kind, csv.str(), "point " + std::to_string(profile_point));
    } else if (*taxonomy) {
      const TaxonomyConfig cfg{tax_threshold};
      cfg.validate();
      const RunCollection coll = detail::load(tax_logs);
      const std::optional<RunCollection> ref =
          tax_ref.empty() ? std::nullopt : std::optional<RunCollection>(detail::load(tax_ref));
      const Decomposition d = decompose(Profiler(coll, ref ? *ref : coll, std::nullopt, tax_flags.options()), cfg);
      detail::emit(tax_out, out, [&](std::ostream& o) { write_csv(o, d); });
      if (!tax_summary.empty()) {
        detail::emit(tax_summary, out, [&](std::ostream& o) { o << summary_json(d, cfg).dump(2) << '\n'; });
      }
      std::ostringstream pie;
      pie << "label,count\n";
      for (Taxon t : kAllTaxa) pie << to_string(t) << ',' << d.count(t) << '\n';
      detail::emit_plot(tax_svg, PlotKind::kPie, pie.str(), "profile types");
    } else if (*distance) {
      const DistributionMetric metric{parse_metric(dist_metric)};
      std::vector<std::pair<std::string, std::vector<std::string>>> specs;
      if (!dist_families.empty()) {
        if (!dist_a.empty() || !dist_b.empty()) fail("use either --a/--b or --family, not both");
        for (const auto& f : dist_families) {
          const auto eq = f.find('=');
          if (eq == std::string::npos || eq == 0) fail("--family expects name=dir,dir,... (got '" + f + "')");
          std::vector<std::string> dirs;
          for (auto d : logstore::detail::split(std::string_view(f).substr(eq + 1), ',')) dirs.emplace_back(d);
          specs.emplace_back(f.substr(0, eq), std::move(dirs));
        }
      } else {
        if (dist_a.empty() || dist_b.empty()) fail("distance needs --a and --b, or --family");
        specs = {{"a", dist_a}, {"b", dist_b}};
      }
      std::vector<RunCollection> colls;
      colls.reserve(specs.size());
      for (const auto& s : specs) colls.push_back(detail::load(s.second));
      std::vector<const RunCollection*> ptrs;
      for (const auto& c : colls) ptrs.push_back(&c);
      const AccuracyGrid grid = detail::shared_grid(ptrs, dist_flags.grid_size);
      std::vector<std::size_t> points = dist_points;
      if (points.empty()) {
        points.resize(colls.front().num_points());
        for (std::size_t i = 0; i < points.size(); ++i) points[i] = i;
      }
      std::vector<ProfileFamily> families;
      for (std::size_t f = 0; f < colls.size(); ++f) {
        const Profiler prof(colls[f], grid, dist_flags.options());
        std::vector<std::optional<SoftmaxProfile>> slots(points.size());
        parallel_for(points.size(), [&](std::size_t i) { slots[i] = prof.softmax(points[i]); });
        ProfileFamily fam{specs[f].first, points, {}};
        fam.profiles.reserve(points.size());
        for (auto& s : slots) fam.profiles.push_back(std::move(*s));
        families.push_back(std::move(fam));
      }
      const DistanceMatrix m = pairwise_matrix(families, metric);
      if (dist_families.empty()) {
        const nlohmann::json j{{"metric", dist_metric}, {"distance", m(0, 1)}, {"points", points.size()},
                               {"p_min", grid.p_min()}, {"p_max", grid.p_max()}};
        detail::emit(dist_out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
      } else {
        detail::emit(dist_out, out, [&](std::ostream& o) { write_csv(o, m); });
      }
      std::ostringstream csv;
      write_csv(csv, m);
      detail::emit_plot(dist_svg, PlotKind::kHeatmap, csv.str(), dist_metric + " distance");
    } else if (*gap) {
      const RunCollection a = detail::load(gap_a), b = detail::load(gap_b);
      const AccuracyGrid grid = detail::shared_grid({&a, &b}, gap_flags.grid_size);
      std::ostringstream csv;
      write_csv(csv, pointwise_gap(a, b, grid, gap_flags.options()));
      detail::emit(gap_out, out, [&](std::ostream& o) { o << csv.str(); });
      detail::emit_plot(gap_svg, PlotKind::kCurve, csv.str(), "pointwise gap");
    } else if (*negset_cmd) {
      const RunCollection pool = detail::load(neg_pool);
      const RunCollection ref = detail::load(neg_ref);
      const Profiler prof(pool, ref, std::nullopt, neg_flags.options());
      const auto scores = score_pool(prof, neg_per_run);
      const std::vector<bool> mask = neg_filter.empty() ? std::vector<bool>(pool.num_points(), true)
                                                        : read_filter_mask(neg_filter, pool.num_points());
      const std::string filter_name = neg_filter.empty() ? "none" : fs::path(neg_filter).filename().string();
      const auto m = build_negset(scores, pool.labels(), mask, neg_k, pool.num_classes(), filter_name, neg_provenance);
      detail::emit(neg_out, out, [&](std::ostream& o) { o << to_json(m).dump(2) << '\n'; });
      if (!neg_scores.empty()) {
        detail::emit(neg_scores, out, [&](std::ostream& o) {
          o << "point_id,class,score,passes_filter\n";
          for (std::size_t i = 0; i < scores.size(); ++i) {
            o << i << ',' << pool.labels()[i] << ',' << format_double(scores[i]) << ',' << (mask[i] ? 1 : 0) << '\n';
          }
        });
      }
    } else if (*negset_eval) {
      std::ifstream in(eval_manifest);
      if (!in) fail("cannot open manifest " + eval_manifest);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        fail("malformed manifest " + eval_manifest + ": " + e.what());
      }
      const NegSetManifest m = manifest_from_json(j);
      const RunCollection coll = detail::load(eval_logs);
      const RunCollection ref = detail::load(eval_ref);
      const CorrelationReport report = evaluate_correlation(m, coll, ref, eval_probit);
      std::ostringstream csv;
      write_csv(csv, report);
      if (!eval_out.empty()) detail::emit(eval_out, out, [&](std::ostream& o) { o << csv.str(); });
      nlohmann::json rj = to_json(report);
      rj["pairs"] = report.pairs.size();
      rj["probit"] = eval_probit;
      detail::emit(eval_report, out, [&](std::ostream& o) { o << rj.dump(2) << '\n'; });
      detail::emit_plot(eval_svg, PlotKind::kScatter, csv.str(), "subset vs reference accuracy");
    } else if (*theory_cmd) {
      std::mt19937_64 rng(seed);
      nlohmann::json report;
      bool pass = true;
      if (*skill) {
        std::normal_distribution<double> g(0.0, 2.0);
        std::size_t universal = 0, monotone = 0;
        nlohmann::json first_failure;
        for (std::size_t i = 0; i < skill_models; ++i) {
          theory::SkillModel m;
          m.skills.resize(skill_count);
          m.difficulties.resize(skill_points);
          for (double& s : m.skills) s = g(rng);
          for (double& d : m.difficulties) d = g(rng);
          const auto u = theory::check_universality(m);
          const auto mono = theory::check_accuracy_monotonicity(theory::accuracy_table(m), theory::skill_order(m));
          universal += u.pass;
          monotone += mono.pass;
          if ((!u.pass || !mono.pass) && first_failure.is_null()) {
            first_failure = {{"model", i}, {"universality", theory::to_json(u)}, {"monotonicity", theory::to_json(mono)}};
          }
        }
        pass = universal == skill_models && monotone == skill_models;
        report = {{"model", "skill"},       {"models", skill_models},        {"skills", skill_count},
                  {"points", skill_points}, {"universality_pass", universal}, {"monotonicity_pass", monotone},
                  {"pass", pass}};
        if (!first_failure.is_null()) report["first_failure"] = first_failure;
      } else if (*manifold) {
        std::vector<std::size_t> cells;
        for (double c : detail::parse_list(mf_cells)) {
          if (!(c >= 1.0) || c != std::floor(c)) fail("cells per axis must be positive integers");
          cells.push_back(static_cast<std::size_t>(c));
        }
        if (mf_dim == 0) fail("dimension must be positive");
        const std::size_t per_axis = mf_samples ? mf_samples : (mf_dim == 1 ? 2049 : mf_dim == 2 ? 129 : 17);
        // Ridge along the diagonal: |grad| = L everywhere on a line, so L is tight.
        const double lip = mf_lipschitz;
        const double norm = std::sqrt(static_cast<double>(mf_dim));
        auto target = [lip, norm](std::span<const double> x) {
          double s = 0.0;
          for (double v : x) s += v;
          return lip * std::sin(s / norm * 2.0) / 2.0;
        };
        const auto sweep = theory::scaling_sweep(theory::ManifoldModel{mf_dim, lip, target, 1}, cells,
                                                 theory::lattice(mf_dim, per_axis));
        nlohmann::json errors = nlohmann::json::array();
        for (const auto& [n, e] : sweep.max_error_by_n) errors.push_back({{"n", n}, {"max_error", e}});
        pass = sweep.within_bound;
        report = {{"model", "manifold"},
                  {"dimension", mf_dim},
                  {"lipschitz", mf_lipschitz},
                  {"errors", errors},
                  {"fit", {{"prefactor", sweep.fit.prefactor}, {"exponent", sweep.fit.exponent}}},
                  {"expected_exponent", 1.0 / static_cast<double>(mf_dim)},
                  {"within_bound", sweep.within_bound},
                  {"pass", pass}};
      } else if (*bayes) {
        std::size_t passed = 0;
        nlohmann::json first;
        nlohmann::json first_failure;
        for (std::size_t i = 0; i < by_models; ++i) {
          const auto m = theory::random_bayes_model(rng, by_labels, by_alphabet, by_horizon);
          const auto curves = theory::bayes_expected_curves(m, by_horizon, {by_samples, seed + i});
          const auto r = theory::check_bayes_monotonicity(curves);
          passed += r.pass;
          if (i == 0) first = theory::to_json(curves, r);
          if (!r.pass && first_failure.is_null()) first_failure = theory::to_json(curves, r);
        }
        pass = passed == by_models;
        report = {{"model", "bayes"},  {"models", by_models},   {"labels", by_labels}, {"alphabet", by_alphabet},
                  {"horizon", by_horizon}, {"pass_count", passed}, {"pass", pass},     {"example", first}};
        if (!first_failure.is_null()) report["first_failure"] = first_failure;
      } else if (*gp) {
        std::uniform_real_distribution<double> u(0.0, 10.0);
        std::vector<double> xs(gp_train), ys(gp_train), qs(gp_queries);
        for (std::size_t i = 0; i < gp_train; ++i) {
          xs[i] = u(rng);
          ys[i] = std::sin(xs[i]);
        }
        for (double& q : qs) q = u(rng);
        const theory::RbfKernel kernel{gp_variance, gp_lengthscale};
        const theory::GPModel<double> model(kernel, xs, ys);
        nlohmann::json queries = nlohmann::json::array();
        for (double q : qs) {
          const auto post = model.posterior(q);
          queries.push_back({{"x", q}, {"mean", post.mean}, {"variance", post.variance}});
        }
        report = {{"model", "gp"},
                  {"kernel", {{"variance", gp_variance}, {"lengthscale", gp_lengthscale}}},
                  {"train_inputs", xs},
                  {"queries", queries},
                  {"hardest_first", theory::gp_difficulty_order(model, std::span<const double>(qs))},
                  {"pass", true}};
      }
      report["seed"] = seed;
      detail::emit(theory_out, out, [&](std::ostream& o) { o << report.dump(2) << '\n'; });
      if (!pass) {
        err << "theory-lab: property check failed\n";
        return 1;
      }
    } else if (*plot_cmd) {
      std::ifstream spec_in(plot_spec);
      if (!spec_in) fail("cannot open plot spec " + plot_spec);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(spec_in);
      } catch (const nlohmann::json::exception& e) {
        fail("malformed plot spec " + plot_spec + ": " + e.what());
      }
      const PlotSpec spec = plot_spec_from_json(j);
      std::ifstream data_in(plot_data);
      if (!data_in) fail("cannot open plot data " + plot_data);
      const std::string svg = emit_svg(spec, parse_csv(data_in));
      detail::emit(plot_out, out, [&](std::ostream& o) { o << svg; });
    } else if (*synth_cmd) {
      const auto scenario = synth::make_neg_scenario(synth_cfg);
      for (std::size_t r = 0; r < scenario.pool.size(); ++r) {
        const std::string name = "run_" + std::to_string(r);
        save_log(scenario.pool[r], fs::path(synth_out) / "pool" / name);
        save_log(scenario.reference[r], fs::path(synth_out) / "reference" / name);
      }
      std::ofstream planted(fs::path(synth_out) / "planted.csv");
      planted << "point_id\n";
      for (std::size_t z : scenario.planted) planted << z << '\n';
      out << "wrote " << scenario.pool.size() << " pool and reference runs to " << synth_out << '\n';
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "io: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace profilekit::cli
