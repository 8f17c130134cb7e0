#include "fdloss/error.hpp"

namespace fdloss {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kNonFinite: return "non-finite value";
    case ErrorKind::kAsymmetric: return "asymmetric matrix";
    case ErrorKind::kNotInitialized: return "not initialized";
    case ErrorKind::kBadMagic: return "bad magic";
    case ErrorKind::kTruncated: return "truncated payload";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kFileNotFound: return "file not found";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kNoConvergence: return "no convergence";
    case ErrorKind::kNonFiniteLoss: return "non-finite loss";
    case ErrorKind::kIo: return "i/o failure";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kNoConvergence:
    case ErrorKind::kNonFiniteLoss:
    case ErrorKind::kIo:
      return 3;
    default:
      return 2;
  }
}

}  // namespace fdloss
