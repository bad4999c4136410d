#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "tmrisk/tmrisk.hpp"

namespace tmtest {

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "tmrisk_tests" /
             (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline tmrisk::LiteralVector bits(std::initializer_list<int> raw) {
  std::vector<bool> v;
  for (int b : raw) v.push_back(b != 0);
  return tmrisk::LiteralVector(v);
}

inline tmrisk::FeatureSchema binary_schema(std::size_t n) {
  std::vector<tmrisk::FeatureSpec> specs;
  for (std::size_t i = 0; i < n; ++i) specs.push_back({"x" + std::to_string(i + 1), tmrisk::FeatureKind::binary, {}, {}, "", {}});
  return tmrisk::FeatureSchema(std::move(specs));
}

}  // namespace tmtest
