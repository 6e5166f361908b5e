#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "maspc/diagnostic.hpp"
#include "maspc/model.hpp"

namespace maspc {

struct ParseOptions {
  /// Unknown keys are errors (E_UNKNOWN_KEY) when strict, warnings otherwise.
  bool strict = true;
};

struct ParseResult {
  std::optional<Model> model;  // set iff no error diagnostics
  Diagnostics diagnostics;
};

/// Parses a `.maspm` document. Error codes: E_SYNTAX (malformed JSON or
/// schema violation), E_IDENTIFIER (name breaks IEC identifier rules or
/// collides case-insensitively within its scope), E_VERSION (unsupported
/// formatVersion), E_UNKNOWN_KEY.
ParseResult parse_model(std::string_view text, const ParseOptions& options = {});

/// Canonical form: fixed section order, declaration order within sections,
/// 2-space indentation, LF line endings, trailing newline.
std::string serialize_model(const Model& model);

}  // namespace maspc
