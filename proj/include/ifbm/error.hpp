#pragma once

#include <stdexcept>
#include <string>

namespace ifbm {

enum class ErrorKind {
  Domain,             // argument outside the mathematical domain
  Numerical,          // bracketing / convergence failure
  Resource,           // sample cap exceeded
  Unsupported,        // e.g. region taxonomy requested for K >= 0
  Io,                 // unreadable file, malformed input rows
  DegenerateBinning,  // fewer than two usable chi-square bins
  FitFailure,         // every calibration candidate was degenerate
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_domain(const std::string& what) {
  throw Error(ErrorKind::Domain, what);
}

[[noreturn]] inline void throw_numerical(const std::string& what) {
  throw Error(ErrorKind::Numerical, what);
}

}  // namespace ifbm
