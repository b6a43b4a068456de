#pragma once

#include <stdexcept>
#include <string>

namespace lpsketch {

enum class ErrorCode {
  Usage,             // bad arguments or parameters
  InvalidParameter,  // out-of-domain numeric parameter (k <= 0, s < 1, ...)
  Dimension,         // vector length mismatch
  Data,              // malformed or non-finite input data
  OrderUnsupported,  // odd, too small or too large p
  Incompatible,      // sketches that cannot be combined
  Unsupported,       // estimator / order / strategy combination not offered
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit status for an error code: 2 usage, 3 data, 4 incompatibility.
int exit_status(ErrorCode code) noexcept;

}  // namespace lpsketch
