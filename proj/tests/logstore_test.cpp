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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "profilekit/logstore.hpp"
#include "test_support.hpp"

namespace profilekit {
namespace {

using testing::make_run;
using testing::one_hot;
using testing::TempDir;

RunLog two_checkpoint_log() {
  std::mt19937_64 rng(3);
  return make_run("run-a", {0, 1, 2, 1}, 3, 2, [&](std::size_t, std::size_t) { return testing::random_row(rng, 3); });
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LogstoreTest, SaveLoadRoundTripIsBitExact) {
  TempDir dir;
  const RunLog log = two_checkpoint_log();
  save_log(log, dir.path());
  const RunLog back = load_log(dir.path());
  EXPECT_EQ(back.run_id(), log.run_id());
  EXPECT_EQ(back.num_points(), 4u);
  EXPECT_EQ(back.num_classes(), 3u);
  ASSERT_EQ(back.num_checkpoints(), 2u);
  EXPECT_TRUE(std::equal(back.labels().begin(), back.labels().end(), log.labels().begin()));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& a = log.checkpoints()[k];
    const auto& b = back.checkpoints()[k];
    EXPECT_EQ(a.resource, b.resource);
    ASSERT_EQ(a.softmax.size(), b.softmax.size());
    EXPECT_EQ(std::memcmp(a.softmax.data(), b.softmax.data(), a.softmax.size() * sizeof(float)), 0);
    EXPECT_EQ(a.global_accuracy, b.global_accuracy);
  }
}

TEST(LogstoreTest, MatrixFileIsLittleEndianFloat32) {
  TempDir dir;
  const RunLog log = make_run("r", {0}, 2, 1, [](std::size_t, std::size_t) { return std::vector<float>{0.25f, 0.75f}; });
  save_log(log, dir.path());
  std::ifstream in(dir.path() / "ckpt_0000.f32", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  // 0.25f = 0x3e800000, 0.75f = 0x3f400000
  const std::vector<unsigned char> expected = {0x00, 0x00, 0x80, 0x3e, 0x00, 0x00, 0x40, 0x3f};
  EXPECT_EQ(bytes, expected);
}

TEST(LogstoreTest, RowSummingToPointEightIsRejectedWithRowNamed) {
  const std::string msg = message_of([] {
    make_run("bad", {0, 1}, 2, 1, [](std::size_t, std::size_t z) {
      return z == 1 ? std::vector<float>{0.4f, 0.4f} : std::vector<float>{0.5f, 0.5f};
    });
  });
  EXPECT_NE(msg.find("logstore:"), std::string::npos);
  EXPECT_NE(msg.find("row 1 sums to 0.8"), std::string::npos) << msg;
}

TEST(LogstoreTest, RepeatedResourceIsRejected) {
  std::vector<Checkpoint> ckpts(2);
  for (auto& c : ckpts) {
    c.resource = 10.0;
    c.softmax = one_hot(2, 0);
  }
  const std::string msg = message_of([&] { RunLog("r", 1, 2, {0}, ckpts); });
  EXPECT_NE(msg.find("strictly increasing"), std::string::npos) << msg;
}

TEST(LogstoreTest, ShapeMismatchIsRejected) {
  Checkpoint c;
  c.resource = 1.0;
  c.softmax = {1.0f, 0.0f, 0.0f};
  EXPECT_THROW(RunLog("r", 2, 2, {0, 1}, {c}), Error);
  EXPECT_THROW(RunLog("r", 2, 2, {0}, {}), Error);
  EXPECT_THROW(RunLog("r", 1, 2, {2}, {}), Error);
}

TEST(LogstoreTest, NegativeProbabilityIsRejected) {
  EXPECT_THROW(make_run("r", {0}, 2, 1, [](std::size_t, std::size_t) { return std::vector<float>{1.5f, -0.5f}; }),
               Error);
}

TEST(GlobalAccuracyTest, PerfectClassifierScoresOne) {
  const RunLog log = make_run("r", {0, 2, 1}, 3, 1, [](std::size_t, std::size_t z) {
    const std::uint32_t labels[] = {0, 2, 1};
    return one_hot(3, labels[z]);
  });
  EXPECT_EQ(log.checkpoints()[0].global_accuracy, 1.0);
}

TEST(GlobalAccuracyTest, TiesBreakToLowestClass) {
  const RunLog log = make_run("r", {0, 0}, 2, 1, [](std::size_t, std::size_t) { return testing::uniform_row(2); });
  EXPECT_EQ(log.checkpoints()[0].global_accuracy, 1.0);
}

TEST(GlobalAccuracyTest, ThreeOfFourCorrect) {
  Checkpoint c;
  c.softmax = {0.9f, 0.1f, 0.2f, 0.8f, 0.6f, 0.4f, 0.3f, 0.7f};
  const std::vector<std::uint32_t> labels = {0, 1, 0, 0};
  EXPECT_EQ(compute_global_accuracy(c, labels, 2), 0.75);
}

TEST(GlobalAccuracyTest, ShapeMismatchThrows) {
  Checkpoint c;
  c.softmax = {1.0f, 0.0f};
  const std::vector<std::uint32_t> labels = {0, 1};
  EXPECT_THROW(compute_global_accuracy(c, labels, 2), Error);
}

TEST(GlobalAccuracyTest, PermutationInvariantAndEqualsMeanIndicator) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40, classes = 2 + rng() % 5;
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint32_t>(rng() % classes);
    std::vector<std::vector<float>> rows(n);
    for (auto& r : rows) r = testing::random_row(rng, classes);

    Checkpoint c;
    for (const auto& r : rows) c.softmax.insert(c.softmax.end(), r.begin(), r.end());
    const double acc = compute_global_accuracy(c, labels, classes);
    double indicator_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      indicator_mean += (argmax(std::span<const float>(rows[i])) == labels[i]) ? 1.0 : 0.0;
    }
    EXPECT_DOUBLE_EQ(acc, indicator_mean / static_cast<double>(n));
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Checkpoint shuffled;
    std::vector<std::uint32_t> shuffled_labels;
    for (std::size_t i : perm) {
      shuffled.softmax.insert(shuffled.softmax.end(), rows[i].begin(), rows[i].end());
      shuffled_labels.push_back(labels[i]);
    }
    EXPECT_EQ(compute_global_accuracy(shuffled, shuffled_labels, classes), acc);
  }
}

TEST(LogstoreTest, SavingLogWithoutCheckpointsFails) {
  TempDir dir;
  const RunLog empty("empty", 1, 2, {0}, {});
  EXPECT_THROW(save_log(empty, dir.path()), Error);
}

TEST(LogstoreTest, CsvCheckpointsLoadLikeBinary) {
  TempDir dir;
  const std::vector<std::uint32_t> labels = {1, 0, 1};
  {
    std::ofstream lf(dir.path() / "labels.u32", std::ios::binary);
    for (std::uint32_t l : labels) {
      const unsigned char b[4] = {static_cast<unsigned char>(l), 0, 0, 0};
      lf.write(reinterpret_cast<const char*>(b), 4);
    }
    std::ofstream c0(dir.path() / "c0.csv");
    c0 << "point_id,class_0,class_1\n0,0.25,0.75\n1,0.5,0.5\n2,0.9,0.1\n";
    std::ofstream c1(dir.path() / "c1.csv");
    c1 << "point_id,class_0,class_1\n0,0.125,0.875\n1,1,0\n2,0.3,0.7\n";
    std::ofstream m(dir.path() / "manifest.json");
    m << R"({"run_id":"csv","num_points":3,"num_classes":2,"labels_file":"labels.u32",
             "checkpoints":[{"resource":1,"file":"c0.csv"},{"resource":2.5,"file":"c1.csv"}]})";
  }
  const RunLog log = load_log(dir.path());
  ASSERT_EQ(log.num_checkpoints(), 2u);
  EXPECT_EQ(log.row(0, 0)[1], 0.75f);
  EXPECT_EQ(log.row(1, 0)[0], 0.125f);
  EXPECT_DOUBLE_EQ(log.checkpoints()[0].global_accuracy, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(log.checkpoints()[1].global_accuracy, 1.0);

  TempDir copy;
  save_log(log, copy.path());
  const RunLog back = load_log(copy.path());
  EXPECT_EQ(back.checkpoints()[1].softmax, log.checkpoints()[1].softmax);
  EXPECT_EQ(back.checkpoints()[1].resource, 2.5);
}

TEST(LogstoreTest, MalformedManifestIsReported) {
  TempDir dir;
  std::ofstream(dir.path() / "manifest.json") << "{\"run_id\": 3";
  const std::string msg = message_of([&] { load_log(dir.path()); });
  EXPECT_NE(msg.find("malformed manifest"), std::string::npos) << msg;
}

TEST(LogstoreTest, DeclaredAccuracyIsCrossChecked) {
  TempDir dir;
  save_log(two_checkpoint_log(), dir.path());
  std::ifstream in(dir.path() / "manifest.json");
  auto manifest = nlohmann::json::parse(in);
  in.close();
  manifest["checkpoints"][0]["global_accuracy"] = 0.123;
  std::ofstream(dir.path() / "manifest.json") << manifest.dump();
  const std::string msg = message_of([&] { load_log(dir.path()); });
  EXPECT_NE(msg.find("declares global accuracy"), std::string::npos) << msg;
}

TEST(LogstoreTest, TruncatedMatrixFileIsRejected) {
  TempDir dir;
  save_log(two_checkpoint_log(), dir.path());
  std::filesystem::resize_file(dir.path() / "ckpt_0001.f32", 8);
  EXPECT_THROW(load_log(dir.path()), Error);
}

TEST(MergeRunsTest, SingleLogGivesSingleton) {
  std::vector<RunLog> logs;
  logs.push_back(two_checkpoint_log());
  EXPECT_EQ(merge_runs(std::move(logs)).size(), 1u);
}

TEST(MergeRunsTest, ThreeCompatibleLogs) {
  std::vector<RunLog> logs = {two_checkpoint_log(), two_checkpoint_log(), two_checkpoint_log()};
  const RunCollection coll = merge_runs(std::move(logs));
  EXPECT_EQ(coll.size(), 3u);
  EXPECT_EQ(coll.num_points(), 4u);
}

TEST(MergeRunsTest, LabelMismatchNamesFirstDifferingPoint) {
  auto rows = [](std::size_t, std::size_t) { return testing::uniform_row(3); };
  std::vector<RunLog> logs = {make_run("a", {0, 1, 2, 1}, 3, 1, rows), make_run("b", {0, 1, 0, 0}, 3, 1, rows)};
  const std::string msg = message_of([&] { merge_runs(std::move(logs)); });
  EXPECT_NE(msg.find("point 2"), std::string::npos) << msg;
}

TEST(MergeRunsTest, EmptyListFails) { EXPECT_THROW(merge_runs({}), Error); }

}  // namespace
}  // namespace profilekit
