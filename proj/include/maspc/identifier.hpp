#pragma once

#include <string>
#include <string_view>

namespace maspc {

/// IEC 61131-3 identifier: letter or underscore first, then letters, digits
/// or underscores; no two consecutive underscores and no trailing underscore.
/// Reserved keywords are rejected.
bool is_iec_identifier(std::string_view name);

bool is_st_keyword(std::string_view name);

/// ASCII upper-case copy; identifiers compare case-insensitively.
std::string to_upper(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

/// Maps arbitrary text onto a valid identifier: runs of non-alphanumerics
/// become a single underscore, leading/trailing underscores are dropped and
/// a leading digit or keyword collision gets a "V_" prefix.
std::string sanitize_identifier(std::string_view text);

}  // namespace maspc
