#pragma once

// Shared fixtures for the test binaries.

#include <filesystem>
#include <string>

#include "clogsim/coefftable.hpp"

namespace clogsim::fixtures {

/// Default-resolution table, built once per process.
inline const CoeffTable& default_table(MicroConfig config) {
  static const CoeffTable a = build_table(MicroConfig::ConfigA);
  static const CoeffTable b = build_table(MicroConfig::ConfigB);
  return config == MicroConfig::ConfigA ? a : b;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("clogsim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string base_config_path() { return std::string(CLOGSIM_SOURCE_DIR) + "/configs/base.cfg"; }

}  // namespace clogsim::fixtures
