#pragma once

#include <filesystem>
#include <string>

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path test_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pmaug_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
