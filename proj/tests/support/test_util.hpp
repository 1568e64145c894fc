#pragma once

#include <filesystem>
#include <string>

#include "cage/subprocess.hpp"

namespace cage::testing {

class TempDir : public cage::TempDir {
 public:
  explicit TempDir(const std::string& prefix = "cage-test") : cage::TempDir(prefix) {}
  std::filesystem::path operator/(const std::string& rel) const { return path() / rel; }
};

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(CAGE_FIXTURE_DIR) / name; }

}  // namespace cage::testing
