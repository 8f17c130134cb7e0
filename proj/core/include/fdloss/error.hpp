#pragma once

#include <stdexcept>
#include <string>

namespace fdloss {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kAsymmetric,
  kNotInitialized,
  kBadMagic,
  kTruncated,
  kConfig,
  kFileNotFound,
  kUsage,
  kNoConvergence,
  kNonFiniteLoss,
  kIo,
};

const char* to_string(ErrorKind kind);

// Process exit code for an error class: 1 usage, 2 data/format, 3 numerical or I/O.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::kNoConvergence, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace fdloss
