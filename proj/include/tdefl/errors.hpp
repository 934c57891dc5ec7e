#pragma once

#include <stdexcept>
#include <string>

namespace tdefl {

/// Malformed or inconsistent input file (bad magic, truncated payload,
/// missing JSON field). The CLI maps this to exit code 2.
class FileFormatError : public std::runtime_error {
 public:
  explicit FileFormatError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical stage failed (non-convergence, singular system, evaluation
/// inside the spectral support). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tdefl
