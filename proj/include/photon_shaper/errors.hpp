#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace photon {

enum class ErrorKind {
  parameter,
  domain,
  capacity,
  refinement,
  undefined_shape,
  coverage,
  singular_coupling,
  unphysical_target,
  design_infeasible,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::refinement: return "refinement";
    case ErrorKind::undefined_shape: return "undefined_shape";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::singular_coupling: return "singular_coupling";
    case ErrorKind::unphysical_target: return "unphysical_target";
    case ErrorKind::design_infeasible: return "design_infeasible";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure in the library is reported through this type so the CLI can map
// it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace photon
