// tests/helpers.hpp

// Copyright 2026 the xreid developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XREID_TESTS_HELPERS_HPP_
#define XREID_TESTS_HELPERS_HPP_

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xreid/dataset.hpp"
#include "xreid/matrix.hpp"

namespace xreid::testing {

inline Sample sample(std::int32_t camera, std::optional<std::int64_t> person,
                     std::int64_t tracklet, double t0, double t1,
                     std::vector<double> features,
                     std::int32_t dataset_id = 0) {
  Sample s;
  s.features = Eigen::Map<Vector>(features.data(),
                                  static_cast<Index>(features.size()));
  s.dataset_id = dataset_id;
  s.camera_id = camera;
  s.person_id = person;
  s.tracklet_id = tracklet;
  s.time_start = t0;
  s.time_end = t1;
  return s;
}

// Unique directory under the system temp root, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / ("xreid_test_" + std::to_string(::getpid()) +
                               "_" + std::to_string(counter_++) + "_" +
                               std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline bool matrices_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

inline bool vectors_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() && a == b;
}

}  // namespace xreid::testing

#endif  // XREID_TESTS_HELPERS_HPP_
