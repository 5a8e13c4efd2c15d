// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the test suites.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "probekit/featurestore.hpp"
#include "probekit/rng.hpp"

namespace probekit::testing {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(
                                             std::filesystem::file_time_type::clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("probekit-" + tag + "-" + std::to_string(rng.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline HiddenStates random_states(Rng& rng, std::size_t length, std::size_t dim, double scale = 1.0) {
  HiddenStates x(length, dim);
  for (float& v : x.values) v = static_cast<float>(scale * rng.normal());
  return x;
}

inline FeatureSequence random_sequence(Rng& rng, std::string segment, std::string speaker, Gender gender,
                                       std::size_t length, std::size_t dim) {
  return {std::move(segment), std::move(speaker), gender, random_states(rng, length, dim)};
}

}  // namespace probekit::testing
