#pragma once

// Shared helpers for unit and acceptance tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "kcurate/error.hpp"

#ifndef KCURATE_TEST_DATA_DIR
#error "KCURATE_TEST_DATA_DIR must be defined"
#endif

namespace kctest {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(KCURATE_TEST_DATA_DIR); }
inline std::string data(const std::string& name) { return (data_dir() / name).string(); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "kc") {
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
      path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rd()));
      if (fs::create_directory(path_)) return;
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

/// Error code of the kcurate::Error thrown by `fn`, or nullopt.
template <typename Fn>
std::optional<kcurate::ErrorCode> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const kcurate::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace kctest
