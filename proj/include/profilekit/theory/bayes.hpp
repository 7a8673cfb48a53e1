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
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/theory/properties.hpp"

namespace profilekit::theory {

/// Exact enumeration is used while |Z|^n stays at or below this many sequences.
inline constexpr double kMaxEnumeratedSequences = 1e6;

/// Joint law of a label Y and observations Z_1..Z_N over finite alphabets.
///
/// Two representations: an explicit table over (Y, Z_1, ..., Z_N), indexed
/// y * |Z|^N + z_1 * |Z|^(N-1) + ... + z_N; or a conditionally i.i.d. model
/// (prior over Y and a channel P(Z | Y)) that is never materialized, so long
/// horizons stay representable.
class DiscreteBayesModel {
 public:
  static DiscreteBayesModel from_joint(std::size_t labels, std::size_t alphabet, std::size_t horizon,
                                       std::vector<double> joint) {
    DiscreteBayesModel m(labels, alphabet, horizon);
    if (std::pow(static_cast<double>(alphabet), static_cast<double>(horizon)) * labels > 5e7) {
      fail("joint table too large to materialize");
    }
    if (joint.size() != labels * m.power(horizon)) fail("joint table size does not match its shape");
    check_distribution(joint, "joint table");
    m.marginals_.resize(horizon + 1);
    m.marginals_[horizon] = std::move(joint);
    for (std::size_t n = horizon; n > 0; --n) {
      const std::size_t width = m.power(n - 1);
      auto& coarse = m.marginals_[n - 1];
      const auto& fine = m.marginals_[n];
      coarse.assign(labels * width, 0.0);
      for (std::size_t y = 0; y < labels; ++y) {
        for (std::size_t q = 0; q < width; ++q) {
          double s = 0.0;
          for (std::size_t z = 0; z < alphabet; ++z) s += fine[y * width * alphabet + q * alphabet + z];
          coarse[y * width + q] = s;
        }
      }
    }
    return m;
  }

  /// prior[y]; channel row-major [labels x alphabet], each row a distribution.
  static DiscreteBayesModel conditionally_iid(std::vector<double> prior, std::vector<double> channel,
                                              std::size_t horizon) {
    const std::size_t labels = prior.size();
    if (labels == 0 || channel.size() % labels != 0) fail("channel must have one row per label");
    DiscreteBayesModel m(labels, channel.size() / labels, horizon);
    check_distribution(prior, "prior");
    for (std::size_t y = 0; y < labels; ++y) {
      check_distribution(std::span<const double>(channel).subspan(y * m.alphabet_, m.alphabet_), "channel row");
    }
    m.prior_ = std::move(prior);
    m.channel_ = std::move(channel);
    return m;
  }

  std::size_t labels() const noexcept { return labels_; }
  std::size_t alphabet() const noexcept { return alphabet_; }
  std::size_t horizon() const noexcept { return horizon_; }
  bool factorized() const noexcept { return marginals_.empty(); }

  /// P(Y = y, Z_1..Z_n = prefix) for every y.
  std::vector<double> joint_prefix(std::span<const std::size_t> prefix) const {
    check_prefix(prefix);
    std::vector<double> out(labels_);
    if (factorized()) {
      for (std::size_t y = 0; y < labels_; ++y) {
        double v = prior_[y];
        for (std::size_t z : prefix) v *= channel_[y * alphabet_ + z];
        out[y] = v;
      }
    } else {
      std::size_t q = 0;
      for (std::size_t z : prefix) q = q * alphabet_ + z;
      const std::size_t width = power(prefix.size());
      for (std::size_t y = 0; y < labels_; ++y) out[y] = marginals_[prefix.size()][y * width + q];
    }
    return out;
  }

  /// Draws (y, z_1..z_N) from the joint law.
  template <typename Rng>
  std::pair<std::size_t, std::vector<std::size_t>> sample(Rng& rng) const {
    std::vector<std::size_t> z(horizon_);
    if (factorized()) {
      std::discrete_distribution<std::size_t> pick_y(prior_.begin(), prior_.end());
      const std::size_t y = pick_y(rng);
      std::discrete_distribution<std::size_t> pick_z(channel_.begin() + static_cast<std::ptrdiff_t>(y * alphabet_),
                                                     channel_.begin() + static_cast<std::ptrdiff_t>((y + 1) * alphabet_));
      for (auto& v : z) v = pick_z(rng);
      return {y, z};
    }
    const auto& joint = marginals_[horizon_];
    std::discrete_distribution<std::size_t> pick(joint.begin(), joint.end());
    std::size_t idx = pick(rng);
    const std::size_t width = power(horizon_);
    const std::size_t y = idx / width;
    idx %= width;
    for (std::size_t i = horizon_; i > 0; --i) {
      z[i - 1] = idx % alphabet_;
      idx /= alphabet_;
    }
    return {y, z};
  }

  std::size_t power(std::size_t n) const {
    std::size_t p = 1;
    for (std::size_t i = 0; i < n; ++i) p *= alphabet_;
    return p;
  }

 private:
  DiscreteBayesModel(std::size_t labels, std::size_t alphabet, std::size_t horizon)
      : labels_(labels), alphabet_(alphabet), horizon_(horizon) {
    if (labels == 0 || alphabet == 0) fail("label and observation alphabets must be non-empty");
  }

  static void check_distribution(std::span<const double> p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(what) + " has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) fail(std::string(what) + " does not sum to 1");
  }

  void check_prefix(std::span<const std::size_t> prefix) const {
    if (prefix.size() > horizon_) fail("observation sequence longer than the model horizon");
    for (std::size_t z : prefix) {
      if (z >= alphabet_) fail("observation symbol " + std::to_string(z) + " outside the alphabet");
    }
  }

  std::size_t labels_;
  std::size_t alphabet_;
  std::size_t horizon_;
  std::vector<std::vector<double>> marginals_;  // table form: marginals_[n] over (Y, Z_1..Z_n)
  std::vector<double> prior_;                   // factorized form
  std::vector<double> channel_;
};

inline double entropy_nats(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(0.0, h);
}

/// p_n(. | z_1..z_n), the posterior over labels after the given observations.
inline std::vector<double> bayes_posterior(const DiscreteBayesModel& model, std::span<const std::size_t> observations) {
  auto joint = model.joint_prefix(observations);
  double total = 0.0;
  for (double v : joint) total += v;
  if (!(total > 0.0)) fail("observation sequence has zero probability");
  for (double& v : joint) v /= total;
  return joint;
}

/// P(Z_{n+1} = z | z_1..z_n): the mixture weights that decompose p_n into
/// the possible p_{n+1}.
inline std::vector<double> bayes_predictive(const DiscreteBayesModel& model, std::span<const std::size_t> observations) {
  if (observations.size() >= model.horizon()) fail("no further observation within the model horizon");
  const auto base = model.joint_prefix(observations);
  double total = 0.0;
  for (double v : base) total += v;
  if (!(total > 0.0)) fail("observation sequence has zero probability");
  std::vector<std::size_t> next(observations.begin(), observations.end());
  next.push_back(0);
  std::vector<double> out(model.alphabet());
  for (std::size_t z = 0; z < model.alphabet(); ++z) {
    next.back() = z;
    double s = 0.0;
    for (double v : model.joint_prefix(next)) s += v;
    out[z] = s / total;
  }
  return out;
}

inline bool enumerable(const DiscreteBayesModel& model, std::size_t horizon) {
  return std::pow(static_cast<double>(model.alphabet()), static_cast<double>(horizon)) <= kMaxEnumeratedSequences;
}

namespace detail {

// Calls fn(prefix) for every observation sequence of length n, in
// lexicographic order.
template <typename Fn>
void for_each_sequence(std::size_t alphabet, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> seq(n, 0);
  while (true) {
    fn(std::span<const std::size_t>(seq));
    std::size_t i = n;
    while (i > 0 && ++seq[i - 1] == alphabet) seq[--i] = 0;
    if (i == 0) return;
  }
}

}  // namespace detail

struct MonteCarloOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
};

/// E H(p_n) and E max_y p_n(y) for n = 0..horizon. Exact when every
/// |Z|^n <= 1e6; otherwise Monte Carlo with per-step standard errors.
struct BayesCurves {
  std::vector<double> entropy;
  std::vector<double> max_probability;
  bool exact = true;
  std::size_t samples = 0;
  std::vector<double> entropy_se;
  std::vector<double> max_probability_se;
};

inline BayesCurves bayes_expected_curves(const DiscreteBayesModel& model, std::size_t horizon,
                                         MonteCarloOptions mc = {}) {
  if (horizon > model.horizon()) fail("requested horizon exceeds the model horizon");
  BayesCurves out;
  out.entropy.assign(horizon + 1, 0.0);
  out.max_probability.assign(horizon + 1, 0.0);
  if (enumerable(model, horizon)) {
    for (std::size_t n = 0; n <= horizon; ++n) {
      detail::for_each_sequence(model.alphabet(), n, [&](std::span<const std::size_t> prefix) {
        auto joint = model.joint_prefix(prefix);
        double mass = 0.0;
        for (double v : joint) mass += v;
        if (!(mass > 0.0)) return;
        for (double& v : joint) v /= mass;
        out.entropy[n] += mass * entropy_nats(joint);
        out.max_probability[n] += mass * *std::max_element(joint.begin(), joint.end());
      });
    }
    return out;
  }
  if (mc.samples < 2) fail("Monte Carlo needs at least 2 samples");
  out.exact = false;
  out.samples = mc.samples;
  std::vector<double> h2(horizon + 1, 0.0), m2(horizon + 1, 0.0);
  std::mt19937_64 rng(mc.seed);
  for (std::size_t s = 0; s < mc.samples; ++s) {
    const auto [y, z] = model.sample(rng);
    for (std::size_t n = 0; n <= horizon; ++n) {
      const auto post = bayes_posterior(model, std::span<const std::size_t>(z).first(n));
      const double h = entropy_nats(post);
      const double m = *std::max_element(post.begin(), post.end());
      out.entropy[n] += h;
      h2[n] += h * h;
      out.max_probability[n] += m;
      m2[n] += m * m;
    }
  }
  const double count = static_cast<double>(mc.samples);
  out.entropy_se.resize(horizon + 1);
  out.max_probability_se.resize(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n) {
    out.entropy[n] /= count;
    out.max_probability[n] /= count;
    const double vh = std::max(0.0, h2[n] / count - out.entropy[n] * out.entropy[n]);
    const double vm = std::max(0.0, m2[n] / count - out.max_probability[n] * out.max_probability[n]);
    out.entropy_se[n] = std::sqrt(vh / (count - 1.0));
    out.max_probability_se[n] = std::sqrt(vm / (count - 1.0));
  }
  return out;
}

/// Probability that the argmax-posterior predictor is correct after n
/// observations, with ties split uniformly among the maximizers.
inline double bayes_accuracy(const DiscreteBayesModel& model, std::size_t n) {
  if (n > model.horizon()) fail("requested step exceeds the model horizon");
  if (!enumerable(model, n)) return bayes_expected_curves(model, n).max_probability[n];
  double correct = 0.0;
  detail::for_each_sequence(model.alphabet(), n, [&](std::span<const std::size_t> prefix) {
    const auto joint = model.joint_prefix(prefix);
    const double top = *std::max_element(joint.begin(), joint.end());
    if (!(top > 0.0)) return;
    double winners = 0.0, mass = 0.0;
    for (double v : joint) {
      if (v >= top * (1.0 - 1e-12)) {
        winners += 1.0;
        mass += v;
      }
    }
    correct += mass / winners;
  });
  return correct;
}

struct BayesMonotonicityReport {
  bool pass = true;
  std::optional<std::string> curve;  // "entropy" or "max_probability" on failure
  std::size_t step = 0;
};

/// Entropy must not increase and max-probability must not decrease from n to
/// n + 1, up to `tolerance` (exact mode) or three combined standard errors
/// (Monte Carlo mode).
inline BayesMonotonicityReport check_bayes_monotonicity(const BayesCurves& c, double tolerance = 1e-9) {
  for (std::size_t n = 0; n + 1 < c.entropy.size(); ++n) {
    double tol_h = tolerance, tol_m = tolerance;
    if (!c.exact) {
      tol_h = 3.0 * std::hypot(c.entropy_se[n], c.entropy_se[n + 1]);
      tol_m = 3.0 * std::hypot(c.max_probability_se[n], c.max_probability_se[n + 1]);
    }
    if (c.entropy[n + 1] > c.entropy[n] + tol_h) return {false, "entropy", n};
    if (c.max_probability[n + 1] < c.max_probability[n] - tol_m) return {false, "max_probability", n};
  }
  return {};
}

/// A random joint table over (Y, Z_1..Z_N) with exponential(1) weights.
template <typename Rng>
DiscreteBayesModel random_bayes_model(Rng& rng, std::size_t labels, std::size_t alphabet, std::size_t horizon) {
  std::exponential_distribution<double> weight(1.0);
  std::size_t size = labels;
  for (std::size_t i = 0; i < horizon; ++i) size *= alphabet;
  std::vector<double> joint(size);
  double total = 0.0;
  for (double& v : joint) total += (v = weight(rng));
  for (double& v : joint) v /= total;
  return DiscreteBayesModel::from_joint(labels, alphabet, horizon, std::move(joint));
}

inline nlohmann::json to_json(const BayesCurves& c, const BayesMonotonicityReport& r) {
  nlohmann::json out{{"property", "entropy_and_accuracy_monotonicity"},
                     {"pass", r.pass},
                     {"exact", c.exact},
                     {"curves", {{"expected_entropy", c.entropy}, {"expected_max_probability", c.max_probability}}}};
  if (!c.exact) {
    out["samples"] = c.samples;
    out["curves"]["entropy_se"] = c.entropy_se;
    out["curves"]["max_probability_se"] = c.max_probability_se;
  }
  if (!r.pass) out["witness"] = {{"curve", *r.curve}, {"step", r.step}};
  return out;
}

}  // namespace profilekit::theory
