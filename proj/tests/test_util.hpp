/*
 * Copyright 2026 The fedanomaly Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDANOMALY_TESTS_TEST_UTIL_HPP_
#define FEDANOMALY_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fedanomaly/fedanomaly.hpp"

namespace fedanomaly::testing_util {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("fedanomaly_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Network from "a-b" style edge strings and optional p-values.
inline Network MakeNetwork(const std::string& id,
                           const std::vector<std::string>& nodes,
                           const std::vector<NamedEdge>& edges,
                           const std::map<std::string, double>& p = {}) {
  return Network::Build(id, nodes, edges, p);
}

inline std::vector<NodeIndex> Indices(const Network& net,
                                      const std::vector<std::string>& names) {
  std::vector<NodeIndex> out;
  for (const auto& n : names) out.push_back(net.IndexOf(n));
  return out;
}

}  // namespace fedanomaly::testing_util

#endif  // FEDANOMALY_TESTS_TEST_UTIL_HPP_
