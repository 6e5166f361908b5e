#include "maspc/identifier.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

namespace maspc {

namespace {

constexpr std::string_view kKeywords[] = {
    "ACTION",       "AND",          "ARRAY",        "AT",          "BOOL",         "BY",
    "CASE",         "CONSTANT",     "DINT",         "DO",          "ELSE",         "ELSIF",
    "END_ACTION",   "END_CASE",     "END_FOR",      "END_FUNCTION", "END_FUNCTION_BLOCK",
    "END_IF",       "END_PROGRAM",  "END_REPEAT",   "END_STRUCT",  "END_TYPE",     "END_VAR",
    "END_WHILE",    "EXIT",         "FALSE",        "FOR",         "FUNCTION",     "FUNCTION_BLOCK",
    "GOTO",         "IF",           "INT",          "LREAL",       "MOD",          "NOT",
    "OF",           "OR",           "PROGRAM",      "REAL",        "REPEAT",       "RETAIN",
    "RETURN",       "STRUCT",       "THEN",         "TO",          "TRUE",         "TYPE",
    "UNTIL",        "VAR",          "VAR_EXTERNAL", "VAR_GLOBAL",  "VAR_INPUT",    "VAR_IN_OUT",
    "VAR_OUTPUT",   "VAR_TEMP",     "WHILE",        "XOR",         "CONTINUE",     "SINT",
    "LINT",         "STRING",       "TIME",
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::toupper(x) == std::toupper(y);
         });
}

bool is_st_keyword(std::string_view name) {
  const std::string upper = to_upper(name);
  return std::find(std::begin(kKeywords), std::end(kKeywords), upper) != std::end(kKeywords);
}

bool is_iec_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!is_alpha(name.front()) && name.front() != '_') return false;
  if (name.back() == '_') return false;
  char prev = '\0';
  for (char c : name) {
    if (!is_alnum(c) && c != '_') return false;
    if (c == '_' && prev == '_') return false;
    prev = c;
  }
  return !is_st_keyword(name);
}

std::string sanitize_identifier(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (is_alnum(c)) {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) return "V";
  if (!is_alpha(out.front()) || is_st_keyword(out)) out.insert(0, "V_");
  return out;
}

}  // namespace maspc
