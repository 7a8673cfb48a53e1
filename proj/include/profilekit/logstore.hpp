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

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "profilekit/error.hpp"

namespace profilekit {

namespace logstore {

inline constexpr std::string_view kModule = "logstore";
inline constexpr double kRowSumTolerance = 1e-4;
inline constexpr double kDeclaredAccuracyTolerance = 1e-9;
inline constexpr const char* kManifestName = "manifest.json";

[[noreturn]] inline void fail(const std::string& message) { throw Error(kModule, message); }

}  // namespace logstore

/// Index of the largest entry; ties go to the lowest index.
template <typename T>
std::size_t argmax(std::span<const T> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

/// One evaluation of a model over every point of a log.
///
/// `softmax` is row-major [num_points x num_classes]. `global_accuracy` is NaN
/// until the owning RunLog computes it; a finite value supplied on input is
/// treated as a declared value and cross-checked against the recomputation.
struct Checkpoint {
  double resource = 0.0;
  std::vector<float> softmax;
  double global_accuracy = std::numeric_limits<double>::quiet_NaN();
};

/// Fraction of points whose argmax prediction equals the label.
inline double compute_global_accuracy(const Checkpoint& checkpoint,
                                      std::span<const std::uint32_t> labels,
                                      std::size_t num_classes) {
  const std::size_t num_points = labels.size();
  if (num_classes == 0 || checkpoint.softmax.size() != num_points * num_classes) {
    logstore::fail("checkpoint matrix has " + std::to_string(checkpoint.softmax.size()) +
                   " entries, expected " + std::to_string(num_points) + " x " +
                   std::to_string(num_classes));
  }
  if (num_points == 0) logstore::fail("cannot compute accuracy over zero points");
  std::size_t correct = 0;
  const std::span<const float> all(checkpoint.softmax);
  for (std::size_t i = 0; i < num_points; ++i) {
    if (argmax(all.subspan(i * num_classes, num_classes)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(num_points);
}

/// A single training run evaluated at a sequence of checkpoints.
/// Validated on construction and immutable afterwards.
class RunLog {
 public:
  RunLog(std::string run_id, std::size_t num_points, std::size_t num_classes,
         std::vector<std::uint32_t> labels, std::vector<Checkpoint> checkpoints)
      : run_id_(std::move(run_id)),
        num_points_(num_points),
        num_classes_(num_classes),
        labels_(std::move(labels)),
        checkpoints_(std::move(checkpoints)) {
    validate_and_score();
  }

  const std::string& run_id() const noexcept { return run_id_; }
  std::size_t num_points() const noexcept { return num_points_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::span<const Checkpoint> checkpoints() const noexcept { return checkpoints_; }
  std::size_t num_checkpoints() const noexcept { return checkpoints_.size(); }

  std::span<const float> row(std::size_t checkpoint, std::size_t point) const {
    return std::span<const float>(checkpoints_[checkpoint].softmax)
        .subspan(point * num_classes_, num_classes_);
  }

  bool correct(std::size_t checkpoint, std::size_t point) const {
    return argmax(row(checkpoint, point)) == labels_[point];
  }

  std::vector<double> global_accuracies() const {
    std::vector<double> out;
    out.reserve(checkpoints_.size());
    for (const auto& c : checkpoints_) out.push_back(c.global_accuracy);
    return out;
  }

 private:
  void validate_and_score() {
    using logstore::fail;
    if (num_points_ == 0) fail("run '" + run_id_ + "' has no points");
    if (num_classes_ == 0) fail("run '" + run_id_ + "' has no classes");
    if (labels_.size() != num_points_) {
      fail("run '" + run_id_ + "' has " + std::to_string(labels_.size()) + " labels for " +
           std::to_string(num_points_) + " points");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] >= num_classes_) {
        fail("label of point " + std::to_string(i) + " is " + std::to_string(labels_[i]) +
             ", outside [0, " + std::to_string(num_classes_) + ")");
      }
    }
    for (std::size_t k = 0; k < checkpoints_.size(); ++k) {
      Checkpoint& ckpt = checkpoints_[k];
      if (!std::isfinite(ckpt.resource) || ckpt.resource < 0.0) {
        fail("checkpoint " + std::to_string(k) + " has invalid resource value");
      }
      if (k > 0 && !(ckpt.resource > checkpoints_[k - 1].resource)) {
        std::ostringstream msg;
        msg << "checkpoint resources must be strictly increasing: checkpoint " << k
            << " has resource " << ckpt.resource << " after " << checkpoints_[k - 1].resource;
        fail(msg.str());
      }
      if (ckpt.softmax.size() != num_points_ * num_classes_) {
        fail("checkpoint " + std::to_string(k) + " matrix has " +
             std::to_string(ckpt.softmax.size()) + " entries, expected " +
             std::to_string(num_points_) + " x " + std::to_string(num_classes_));
      }
      for (std::size_t i = 0; i < num_points_; ++i) {
        double sum = 0.0;
        for (float v : row(k, i)) {
          if (!std::isfinite(v) || v < 0.0f) {
            fail("checkpoint " + std::to_string(k) + " row " + std::to_string(i) +
                 " has a negative or non-finite probability");
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > logstore::kRowSumTolerance) {
          std::ostringstream msg;
          msg << "checkpoint " << k << " row " << i << " sums to " << std::setprecision(9) << sum
              << " (outside 1 +/- " << logstore::kRowSumTolerance << ")";
          fail(msg.str());
        }
      }
      const double acc = compute_global_accuracy(ckpt, labels_, num_classes_);
      if (std::isfinite(ckpt.global_accuracy) &&
          std::abs(ckpt.global_accuracy - acc) > logstore::kDeclaredAccuracyTolerance) {
        std::ostringstream msg;
        msg << "checkpoint " << k << " declares global accuracy " << std::setprecision(17)
            << ckpt.global_accuracy << " but its matrix gives " << acc;
        fail(msg.str());
      }
      ckpt.global_accuracy = acc;
    }
  }

  std::string run_id_;
  std::size_t num_points_;
  std::size_t num_classes_;
  std::vector<std::uint32_t> labels_;
  std::vector<Checkpoint> checkpoints_;
};

/// Runs over the same labelled point set (e.g. independent seeds).
class RunCollection {
 public:
  explicit RunCollection(std::vector<RunLog> runs) : runs_(std::move(runs)) {
    if (runs_.empty()) logstore::fail("a run collection needs at least one run");
    const RunLog& first = runs_.front();
    for (std::size_t r = 1; r < runs_.size(); ++r) {
      const RunLog& run = runs_[r];
      if (run.num_points() != first.num_points() || run.num_classes() != first.num_classes()) {
        logstore::fail("run '" + run.run_id() + "' has shape " + std::to_string(run.num_points()) +
                       " x " + std::to_string(run.num_classes()) + ", expected " +
                       std::to_string(first.num_points()) + " x " +
                       std::to_string(first.num_classes()));
      }
      for (std::size_t i = 0; i < first.num_points(); ++i) {
        if (run.labels()[i] != first.labels()[i]) {
          logstore::fail("run '" + run.run_id() + "' disagrees with run '" + first.run_id() +
                         "' on the label of point " + std::to_string(i));
        }
      }
    }
  }

  std::span<const RunLog> runs() const noexcept { return runs_; }
  std::size_t size() const noexcept { return runs_.size(); }
  const RunLog& operator[](std::size_t r) const { return runs_[r]; }
  std::size_t num_points() const noexcept { return runs_.front().num_points(); }
  std::size_t num_classes() const noexcept { return runs_.front().num_classes(); }
  std::span<const std::uint32_t> labels() const noexcept { return runs_.front().labels(); }

 private:
  std::vector<RunLog> runs_;
};

inline RunCollection merge_runs(std::vector<RunLog> logs) { return RunCollection(std::move(logs)); }

namespace logstore::detail {

template <typename T>
T from_little_endian(const unsigned char* bytes) {
  static_assert(sizeof(T) == 4);
  std::uint32_t raw = static_cast<std::uint32_t>(bytes[0]) |
                      (static_cast<std::uint32_t>(bytes[1]) << 8) |
                      (static_cast<std::uint32_t>(bytes[2]) << 16) |
                      (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<T>(raw);
}

template <typename T>
void to_little_endian(T value, unsigned char* bytes) {
  static_assert(sizeof(T) == 4);
  const auto raw = std::bit_cast<std::uint32_t>(value);
  bytes[0] = static_cast<unsigned char>(raw & 0xffu);
  bytes[1] = static_cast<unsigned char>((raw >> 8) & 0xffu);
  bytes[2] = static_cast<unsigned char>((raw >> 16) & 0xffu);
  bytes[3] = static_cast<unsigned char>((raw >> 24) & 0xffu);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename T>
std::vector<T> read_binary(const std::filesystem::path& path, std::size_t expected) {
  const std::string bytes = read_file(path);
  if (bytes.size() != expected * 4) {
    fail(path.filename().string() + " holds " + std::to_string(bytes.size()) +
         " bytes, expected " + std::to_string(expected * 4));
  }
  std::vector<T> out(expected);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < expected; ++i) out[i] = from_little_endian<T>(data + 4 * i);
  return out;
}

template <typename T>
void write_binary(const std::filesystem::path& path, std::span<const T> values) {
  std::string bytes(values.size() * 4, '\0');
  auto* data = reinterpret_cast<unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < values.size(); ++i) to_little_endian(values[i], data + 4 * i);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("write failed for " + path.string());
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline std::vector<float> read_csv_matrix(const std::filesystem::path& path, std::size_t num_points,
                                          std::size_t num_classes) {
  std::istringstream in(read_file(path));
  const std::string where = path.filename().string();
  std::string line;
  if (!std::getline(in, line)) fail(where + " is empty");
  const auto header = split(trim(line), ',');
  if (header.size() != num_classes + 1 || trim(header[0]) != "point_id") {
    fail(where + ": header must be point_id,class_0,...,class_" + std::to_string(num_classes - 1));
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (trim(header[c + 1]) != "class_" + std::to_string(c)) {
      fail(where + ": header column " + std::to_string(c + 1) + " must be class_" +
           std::to_string(c));
    }
  }
  std::vector<float> out;
  out.reserve(num_points * num_classes);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    const std::string at = where + " line " + std::to_string(row + 2);
    if (fields.size() != num_classes + 1) fail(at + ": expected " + std::to_string(num_classes + 1) + " fields");
    std::size_t point_id = 0;
    if (!parse_number(fields[0], point_id) || point_id != row) {
      fail(at + ": point_id must be " + std::to_string(row));
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      float v = 0.0f;
      if (!parse_number(fields[c + 1], v)) fail(at + ": cannot parse '" + std::string(fields[c + 1]) + "'");
      out.push_back(v);
    }
    ++row;
  }
  if (row != num_points) {
    fail(where + " has " + std::to_string(row) + " rows, expected " + std::to_string(num_points));
  }
  return out;
}

}  // namespace logstore::detail

/// Reads a log directory (or a manifest path directly) and validates it.
inline RunLog load_log(const std::filesystem::path& path) {
  using logstore::fail;
  namespace fs = std::filesystem;
  const fs::path manifest_path =
      fs::is_directory(path) ? path / logstore::kManifestName : path;
  const fs::path base = manifest_path.parent_path();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(logstore::detail::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    fail("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  try {
    const auto run_id = manifest.at("run_id").get<std::string>();
    const auto num_points = manifest.at("num_points").get<std::size_t>();
    const auto num_classes = manifest.at("num_classes").get<std::size_t>();
    const auto labels_file = manifest.at("labels_file").get<std::string>();
    const auto& entries = manifest.at("checkpoints");
    if (!entries.is_array() || entries.empty()) fail("malformed manifest: no checkpoints listed");
    auto labels = logstore::detail::read_binary<std::uint32_t>(base / labels_file, num_points);
    std::vector<Checkpoint> checkpoints;
    checkpoints.reserve(entries.size());
    for (const auto& entry : entries) {
      Checkpoint ckpt;
      ckpt.resource = entry.at("resource").get<double>();
      const fs::path file = base / entry.at("file").get<std::string>();
      if (file.extension() == ".csv") {
        ckpt.softmax = logstore::detail::read_csv_matrix(file, num_points, num_classes);
      } else {
        ckpt.softmax = logstore::detail::read_binary<float>(file, num_points * num_classes);
      }
      if (entry.contains("global_accuracy")) ckpt.global_accuracy = entry["global_accuracy"].get<double>();
      checkpoints.push_back(std::move(ckpt));
    }
    return RunLog(run_id, num_points, num_classes, std::move(labels), std::move(checkpoints));
  } catch (const nlohmann::json::exception& e) {
    fail("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
}

/// Writes the binary encoding: manifest.json, labels.u32, ckpt_NNNN.f32.
inline void save_log(const RunLog& log, const std::filesystem::path& dir) {
  using logstore::fail;
  if (log.num_checkpoints() == 0) fail("refusing to save run '" + log.run_id() + "' with no checkpoints");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail("cannot create " + dir.string() + ": " + ec.message());
  logstore::detail::write_binary<std::uint32_t>(dir / "labels.u32", log.labels());
  nlohmann::json manifest{{"run_id", log.run_id()},
                          {"num_points", log.num_points()},
                          {"num_classes", log.num_classes()},
                          {"labels_file", "labels.u32"},
                          {"checkpoints", nlohmann::json::array()}};
  for (std::size_t k = 0; k < log.num_checkpoints(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "ckpt_%04zu.f32", k);
    const Checkpoint& ckpt = log.checkpoints()[k];
    logstore::detail::write_binary<float>(dir / name, ckpt.softmax);
    manifest["checkpoints"].push_back(
        {{"resource", ckpt.resource}, {"file", name}, {"global_accuracy", ckpt.global_accuracy}});
  }
  std::ofstream out(dir / logstore::kManifestName, std::ios::trunc);
  if (!out) fail("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
  if (!out) fail("write failed for manifest in " + dir.string());
}

/// Loads and merges several log directories into one collection.
inline RunCollection load_collection(std::span<const std::filesystem::path> paths) {
  std::vector<RunLog> logs;
  logs.reserve(paths.size());
  for (const auto& p : paths) logs.push_back(load_log(p));
  return merge_runs(std::move(logs));
}

}  // namespace profilekit
