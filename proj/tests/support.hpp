// Copyright 2026 The Enwar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <gtest/gtest.h>

#include "enwar/enwar.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixtures() { return fs::path(ENWAR_FIXTURES_DIR); }
inline fs::path scenes_dir() { return fixtures() / "scenes"; }
inline std::string manifest() { return (scenes_dir() / "manifest.jsonl").string(); }
inline fs::path golden_dir() { return fs::path(ENWAR_GOLDEN_DIR); }

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("enwar_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str(const std::string& leaf = {}) const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  fs::path path_;
};

/// Compares against tests/golden/<name>. With ENWAR_UPDATE_GOLDEN=1 the file
/// is rewritten instead.
inline void expect_golden(const std::string& name, const std::string& actual) {
  const fs::path path = golden_dir() / name;
  const char* update = std::getenv("ENWAR_UPDATE_GOLDEN");
  if (update != nullptr && std::string(update) == "1") {
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << "missing golden " << path;
  EXPECT_EQ(slurp(path), actual) << "golden mismatch: " << name;
}

inline enwar::scene::SceneRecord fixture_record(const std::string& scene_id) {
  for (const auto& entry : enwar::scene::load_manifest(manifest())) {
    if (entry.scene_id == scene_id) return enwar::scene::load_record(entry);
  }
  throw std::runtime_error("no fixture scene " + scene_id);
}

inline std::vector<enwar::scene::SceneRecord> fixture_records() {
  std::vector<enwar::scene::SceneRecord> out;
  for (const auto& entry : enwar::scene::load_manifest(manifest())) {
    out.push_back(enwar::scene::load_record(entry));
  }
  return out;
}

}  // namespace testing_support
