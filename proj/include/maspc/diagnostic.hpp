#pragma once

#include <string>
#include <vector>

namespace maspc {

enum class Severity { Error, Warning };

/// A finding about a model document. `path` is a JSON pointer into the
/// canonical serialization of the model (e.g. "/blocks/2/flows/0").
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string path;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

inline Diagnostic make_error(std::string code, std::string path, std::string message) {
  return {Severity::Error, std::move(code), std::move(path), std::move(message)};
}

inline Diagnostic make_warning(std::string code, std::string path, std::string message) {
  return {Severity::Warning, std::move(code), std::move(path), std::move(message)};
}

inline bool has_errors(const Diagnostics& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

inline std::size_t count_severity(const Diagnostics& diags, Severity s) {
  std::size_t n = 0;
  for (const auto& d : diags)
    if (d.severity == s) ++n;
  return n;
}

const char* to_string(Severity s);

}  // namespace maspc
