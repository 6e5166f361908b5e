#pragma once

#include <stdexcept>
#include <string>

namespace maspc {

/// Base exception for hard failures. `code()` carries the stable E_* code
/// that the CLI and the debug protocol surface to users.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace maspc
