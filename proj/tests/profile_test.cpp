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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "profilekit/profile.hpp"
#include "test_support.hpp"

namespace profilekit {
namespace {

using testing::make_hit_run;
using testing::make_run;
using testing::one_hot;

constexpr std::size_t kDrivers = 9;
constexpr std::size_t kSubject = kDrivers;

// Ten points: driver z is correct from checkpoint z onward, so global accuracy
// climbs with k; the subject point follows `subject(k)`.
RunLog staircase_run(std::string id, const std::function<bool(std::size_t)>& subject, std::size_t checkpoints = 10) {
  std::vector<std::uint32_t> labels(kDrivers + 1);
  for (std::size_t z = 0; z < labels.size(); ++z) labels[z] = static_cast<std::uint32_t>(z % 3);
  return make_hit_run(std::move(id), labels, 3, checkpoints,
                      [&](std::size_t k, std::size_t z) { return z == kSubject ? subject(k) : k >= z; });
}

TEST(ReparameterizeTest, RunningMaximum) {
  const std::vector<double> acc = {0.3, 0.5, 0.4, 0.7};
  EXPECT_EQ(reparameterize(acc), (std::vector<double>{0.3, 0.5, 0.5, 0.7}));
}

TEST(ReparameterizeTest, MonotoneInputUnchanged) {
  const std::vector<double> acc = {0.1, 0.2, 0.2, 0.9};
  EXPECT_EQ(reparameterize(acc), acc);
}

TEST(ReparameterizeTest, SingleCheckpointFails) {
  const std::vector<double> acc = {0.5};
  EXPECT_THROW(reparameterize(acc), Error);
}

// Expected values computed with scipy.ndimage.gaussian_filter1d
// (mode="reflect", truncate=4.0).
TEST(GaussianFilterTest, MatchesReferenceImplementation) {
  const std::vector<double> two = {0.0, 1.0};
  const auto s2 = gaussian_filter(two, 2.0);
  EXPECT_NEAR(s2[0], 0.4964032547487016, 1e-15);
  EXPECT_NEAR(s2[1], 0.5035967452512984, 1e-15);

  const std::vector<double> spike = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  const std::vector<double> spike_expected = {0.03576026233008472, 0.06697589977732399, 0.12142383878585583,
                                              0.17610267517436298, 0.199474647864745,   0.17610267517436298,
                                              0.12142383878585583, 0.06697589977732399, 0.03576026233008472};
  const auto s = gaussian_filter(spike, 2.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], spike_expected[i], 1e-15) << i;

  const std::vector<double> x = {0.3, 0.9, 0.1, 0.5, 0.7, 0.2, 0.8, 0.4, 0.6, 1.0, 0.0, 0.55};
  const std::vector<double> sigma2 = {0.4740182785234006,  0.47274684810133344, 0.473233002101327,
                                      0.47967110653065237, 0.49397215676454276, 0.5146138421643606,
                                      0.5371742667005316,  0.5534212638704182,  0.552760819487212,
                                      0.5305281335916617,  0.4965240700782208,  0.47133621208633913};
  const std::vector<double> sigma1 = {0.46685961673701104, 0.5061617303991263,  0.43508894114741586,
                                      0.45740786058536903, 0.5031143228557168,  0.49469445835554454,
                                      0.5411872840182628,  0.5663695898563927,  0.624810191965255,
                                      0.6014276871116926,  0.4391591770738602,  0.4137191398943534};
  const auto a = gaussian_filter(x, 2.0);
  const auto b = gaussian_filter(x, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(a[i], sigma2[i], 1e-14) << i;
    EXPECT_NEAR(b[i], sigma1[i], 1e-14) << i;
  }
}

TEST(GaussianFilterTest, ZeroSigmaIsIdentity) {
  const std::vector<double> x = {0.1, 0.9, 0.4};
  EXPECT_EQ(gaussian_filter(x, 0.0), x);
}

TEST(SmoothAndGridTest, ConstantStaysConstant) {
  const std::vector<double> p = {0.1, 0.2, 0.35, 0.6, 0.8};
  const std::vector<double> v(5, 0.42);
  const AccuracyGrid grid(0.0, 1.0);
  for (double y : smooth_and_grid(p, v, grid)) EXPECT_NEAR(y, 0.42, 1e-15);
}

TEST(SmoothAndGridTest, TwoSamplesGiveLinearRamp) {
  const std::vector<double> p = {0.0, 1.0};
  const std::vector<double> v = {0.0, 1.0};
  const AccuracyGrid grid(0.0, 1.0);
  const auto out = smooth_and_grid(p, v, grid);
  const double lo = 0.4964032547487016, hi = 0.5035967452512984;
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(out[i], lo + (hi - lo) * grid[i], 1e-14);
}

TEST(SmoothAndGridTest, SpikeIsAttenuated) {
  std::vector<double> p(15), v(15, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.05 * static_cast<double>(i);
  v[7] = 1.0;
  const auto out = smooth_and_grid(p, v, AccuracyGrid(0.0, 0.7));
  EXPECT_LT(*std::max_element(out.begin(), out.end()), 1.0);
  EXPECT_GT(*std::max_element(out.begin(), out.end()), 0.0);
}

TEST(SmoothAndGridTest, PlateauSamplesAreMerged) {
  const std::vector<double> p = {0.2, 0.5, 0.5, 0.8};
  const std::vector<double> v = {0.0, 1.0, 0.0, 1.0};
  const AccuracyGrid grid(0.2, 0.8, 3);
  const auto out = smooth_and_grid(p, v, grid, 0.0);
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 0.5);
  EXPECT_DOUBLE_EQ(out[2], 1.0);
}

TEST(SmoothAndGridTest, EndpointsExtendBeyondSampledRange) {
  const std::vector<double> p = {0.3, 0.7};
  const std::vector<double> v = {0.2, 0.6};
  const AccuracyGrid grid(0.0, 1.0, 11);
  const auto out = smooth_and_grid(p, v, grid, 0.0);
  EXPECT_DOUBLE_EQ(out[0], 0.2);
  EXPECT_DOUBLE_EQ(out[2], 0.2);
  EXPECT_NEAR(out[5], 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(out[10], 0.6);
}

TEST(SmoothAndGridTest, DegenerateRangeFails) {
  const std::vector<double> p = {0.5, 0.5 + 1e-9};
  const std::vector<double> v = {0.0, 1.0};
  EXPECT_THROW(smooth_and_grid(p, v, AccuracyGrid(0.0, 1.0)), Error);
}

TEST(AccuracyGridTest, ShapeAndValidation) {
  const AccuracyGrid g(0.2, 0.7);
  EXPECT_EQ(g.size(), 50u);
  EXPECT_EQ(g[0], 0.2);
  EXPECT_EQ(g[49], 0.7);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_THROW(AccuracyGrid(0.5, 0.5), Error);
  EXPECT_THROW(AccuracyGrid(0.0, 1.0, 1), Error);
}

TEST(AccuracyProfileTest, AlwaysCorrectIsConstantOne) {
  const RunCollection coll({staircase_run("a", [](std::size_t) { return true; })});
  const Profiler prof(coll);
  for (double v : prof.accuracy(kSubject).values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(AccuracyProfileTest, NeverCorrectIsConstantZero) {
  const RunCollection coll({staircase_run("a", [](std::size_t) { return false; })});
  for (double v : Profiler(coll).accuracy(kSubject).values) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(AccuracyProfileTest, HalfOfRunsCorrectGivesOneHalf) {
  const RunCollection coll({staircase_run("a", [](std::size_t) { return true; }),
                            staircase_run("b", [](std::size_t) { return false; })});
  for (double v : Profiler(coll).accuracy(kSubject).values) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(AccuracyProfileTest, DefaultGridIsIntersectionOfRunRanges) {
  // Run a spans global accuracy 0.2..1.0, run b (8 checkpoints) 0.2..0.9.
  const RunCollection coll({staircase_run("a", [](std::size_t) { return true; }),
                            staircase_run("b", [](std::size_t) { return true; }, 8)});
  const auto grid = default_grid(coll);
  EXPECT_DOUBLE_EQ(grid.p_min(), 0.2);
  EXPECT_DOUBLE_EQ(grid.p_max(), 0.9);
  EXPECT_EQ(grid.size(), 50u);
}

TEST(AccuracyProfileTest, PointOutOfRange) {
  const RunCollection coll({staircase_run("a", [](std::size_t) { return true; })});
  EXPECT_THROW(Profiler(coll).accuracy(kSubject + 1), Error);
}

TEST(AccuracyProfileTest, ReferenceCheckpointCountMustMatch) {
  const RunCollection pool({staircase_run("a", [](std::size_t) { return true; }, 8)});
  const RunCollection ref({staircase_run("r", [](std::size_t) { return true; }, 10)});
  EXPECT_THROW(Profiler(pool, ref), Error);
}

RunCollection constant_rows_collection(const std::vector<std::vector<float>>& subject_rows) {
  std::vector<RunLog> runs;
  for (std::size_t r = 0; r < subject_rows.size(); ++r) {
    std::vector<std::uint32_t> labels(kDrivers + 1, 0);
    runs.push_back(make_run("r" + std::to_string(r), labels, 4, 10, [&](std::size_t k, std::size_t z) {
      if (z == kSubject) return subject_rows[r];
      return one_hot(4, k >= z ? 0 : 1);
    }));
  }
  return RunCollection(std::move(runs));
}

TEST(SoftmaxProfileTest, OneHotStaysOneHot) {
  const auto coll = constant_rows_collection({one_hot(4, 3)});
  const auto sp = Profiler(coll).softmax(kSubject);
  for (std::size_t i = 0; i < sp.grid.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(sp.at(i)[c], c == 3 ? 1.0 : 0.0, 1e-15);
  }
}

TEST(SoftmaxProfileTest, UniformStaysUniform) {
  const auto coll = constant_rows_collection({testing::uniform_row(4)});
  const auto sp = Profiler(coll).softmax(kSubject);
  for (double v : sp.data) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(SoftmaxProfileTest, TwoRunsAverage) {
  const std::vector<float> q1 = {0.5f, 0.25f, 0.125f, 0.125f};
  const std::vector<float> q2 = {0.0f, 0.5f, 0.5f, 0.0f};
  const auto coll = constant_rows_collection({q1, q2});
  const auto sp = Profiler(coll).softmax(kSubject);
  for (std::size_t i = 0; i < sp.grid.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(sp.at(i)[c], 0.5 * (q1[c] + q2[c]), 1e-12);
  }
}

TEST(EntropyProfileTest, ClosedForms) {
  EXPECT_EQ(shannon_entropy(std::span<const float>(one_hot(4, 2))), 0.0);
  const auto coll_uniform = constant_rows_collection({testing::uniform_row(4)});
  for (double v : Profiler(coll_uniform).entropy(kSubject).values) EXPECT_NEAR(v, std::log(4.0), 1e-7);
  const auto coll_half = constant_rows_collection({{0.5f, 0.5f, 0.0f, 0.0f}});
  for (double v : Profiler(coll_half).entropy(kSubject).values) EXPECT_NEAR(v, 0.6931471805599453, 1e-12);
  const auto coll_hot = constant_rows_collection({one_hot(4, 1)});
  for (double v : Profiler(coll_hot).entropy(kSubject).values) EXPECT_EQ(v, 0.0);
}

TEST(SoftAccuracyProfileTest, ClosedForms) {
  // Subject label is 0.
  for (double v : Profiler(constant_rows_collection({one_hot(4, 0)})).soft_accuracy(kSubject).values) {
    EXPECT_NEAR(v, 1.0, 1e-15);
  }
  for (double v : Profiler(constant_rows_collection({one_hot(4, 2)})).soft_accuracy(kSubject).values) {
    EXPECT_NEAR(v, 0.0, 1e-15);
  }
  for (double v : Profiler(constant_rows_collection({testing::uniform_row(4)})).soft_accuracy(kSubject).values) {
    EXPECT_NEAR(v, 0.25, 1e-12);
  }
}

TEST(ProfileInvariantsTest, RandomLogsStayInRange) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t classes = 2 + rng() % 6;
    const RunCollection coll = testing::random_collection(rng, 3, 30, classes, 25);
    const Profiler prof(coll);
    for (std::size_t z = 0; z < coll.num_points(); ++z) {
      const auto acc = prof.accuracy(z);
      const auto sp = prof.softmax(z);
      const auto h = prof.entropy(z);
      const auto soft = prof.soft_accuracy(z);
      for (std::size_t i = 0; i < prof.grid().size(); ++i) {
        EXPECT_GE(acc.values[i], 0.0);
        EXPECT_LE(acc.values[i], 1.0);
        double sum = 0.0;
        for (double q : sp.at(i)) {
          EXPECT_GE(q, 0.0);
          sum += q;
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
        EXPECT_GE(h.values[i], 0.0);
        EXPECT_LE(h.values[i], std::log(static_cast<double>(classes)) + 1e-12);
        EXPECT_NEAR(soft.values[i], sp.at(i)[coll.labels()[z]], 1e-9);
      }
    }
  }
}

TEST(ProfileInvariantsTest, AccuracyProfileIsMeanOfPerRunProfiles) {
  std::mt19937_64 rng(5);
  const RunCollection coll = testing::random_collection(rng, 4, 12, 3, 20);
  const Profiler prof(coll);
  for (std::size_t z = 0; z < coll.num_points(); ++z) {
    const auto per_run = prof.per_run_accuracy(z);
    const auto mean = prof.accuracy(z);
    for (std::size_t i = 0; i < prof.grid().size(); ++i) {
      double s = 0.0;
      for (const auto& c : per_run) s += c.values[i];
      EXPECT_NEAR(mean.values[i], s / 4.0, 1e-12);
    }
  }
}

TEST(ProfileInvariantsTest, SmoothingIsLinear) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(30), a(30), b(30), mix(30);
  double acc = 0.1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += 0.02 * u(rng);
    p[i] = acc;
    a[i] = u(rng);
    b[i] = u(rng);
    mix[i] = 0.3 * a[i] + 0.7 * b[i];
  }
  const AccuracyGrid grid(p.front(), p.back());
  const auto sa = smooth_and_grid(p, a, grid), sb = smooth_and_grid(p, b, grid), sm = smooth_and_grid(p, mix, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(sm[i], 0.3 * sa[i] + 0.7 * sb[i], 1e-12);
}

TEST(ProfileCurveTest, NegatedEntropyFlipsKind) {
  ProfileCurve c{AccuracyGrid(0.0, 1.0, 2), {0.5, 0.2}, ProfileKind::kEntropy};
  const auto n = c.negated();
  EXPECT_EQ(n.kind, ProfileKind::kNegEntropy);
  EXPECT_EQ(n.values, (std::vector<double>{-0.5, -0.2}));
}

TEST(ProfileCsvTest, CurveAndSoftmaxHeaders) {
  ProfileCurve c{AccuracyGrid(0.0, 1.0, 2), {0.5, 0.25}, ProfileKind::kAccuracy};
  std::ostringstream a;
  write_csv(a, c);
  EXPECT_EQ(a.str(), "p,value\n0,0.5\n1,0.25\n");
  SoftmaxProfile s{AccuracyGrid(0.0, 1.0, 2), 2, {0.5, 0.5, 1.0, 0.0}};
  std::ostringstream b;
  write_csv(b, s);
  EXPECT_EQ(b.str(), "p,class_0,class_1\n0,0.5,0.5\n1,1,0\n");
}

}  // namespace
}  // namespace profilekit
