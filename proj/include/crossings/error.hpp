#pragma once

#include <stdexcept>
#include <string>

namespace crossings {

enum class ErrorKind {
  Parse,        // syntax / unknown identifier, with position
  Validation,   // a model invariant failed
  Domain,       // argument outside an operation's precondition
  Degenerate,   // sigma^2 vanishes (perfectly predictable process)
  Singular,     // 1 - r^2 vanishes at the requested lag
  Unsupported,  // operation not defined for this model kind
  Simulation,   // embedding failure and friends
  Config,       // run-configuration problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crossings
