#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <gtest/gtest.h>
#include <unistd.h>

#include "phmprep/core/error.hpp"
#include "phmprep/core/text.hpp"

namespace testing_support {

/// Fresh, empty directory under the system temp dir, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "phmprep_tests" / std::to_string(::getpid()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& file,
                                        const std::string& text) {
  auto path = dir / file;
  phmprep::write_file(path, text);
  return path;
}

/// Code of the phmprep::Error thrown by `fn`; records a failure if none is.
inline phmprep::Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const phmprep::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return phmprep::Errc::InvalidArgument;
}

}  // namespace testing_support
