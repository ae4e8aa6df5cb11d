#pragma once

#include "unmixio/core.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("unmixio_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Captures library warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = unmixio::warning_handler();
    unmixio::set_warning_handler(
        [this](const std::string& message) { messages_.push_back(message); });
  }
  ~WarningCapture() { unmixio::set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  unmixio::WarningHandler previous_;
  std::vector<std::string> messages_;
};

inline unmixio::Matrix random_matrix(unmixio::RandomStream& rng,
                                     unmixio::Index rows,
                                     unmixio::Index cols) {
  unmixio::Matrix m(rows, cols);
  for (unmixio::Index r = 0; r < rows; ++r)
    for (unmixio::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  return m;
}

inline double max_abs_diff(const unmixio::Matrix& a, const unmixio::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool exactly_equal(const unmixio::Matrix& a, const unmixio::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

}  // namespace testutil
