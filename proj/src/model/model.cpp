#include "maspc/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "maspc/diagnostic.hpp"
#include "maspc/identifier.hpp"

namespace maspc {

const char* to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

const char* to_string(DataType t) {
  switch (t) {
    case DataType::Bool: return "BOOL";
    case DataType::Int: return "INT";
    case DataType::Dint: return "DINT";
    case DataType::Real: return "REAL";
    case DataType::Lreal: return "LREAL";
  }
  return "?";
}

std::optional<DataType> parse_data_type(std::string_view text) {
  for (DataType t : kAllDataTypes)
    if (iequals(text, to_string(t))) return t;
  return std::nullopt;
}

bool is_integer(DataType t) { return t == DataType::Int || t == DataType::Dint; }
bool is_real(DataType t) { return t == DataType::Real || t == DataType::Lreal; }

bool widens_to(DataType from, DataType to) {
  return (from == DataType::Int && to == DataType::Dint) ||
         (from == DataType::Real && to == DataType::Lreal);
}

bool type_compatible(DataType from, DataType to, bool allow_widening) {
  return from == to || (allow_widening && widens_to(from, to));
}

const char* to_string(PortDirection d) { return d == PortDirection::In ? "in" : "out"; }

const char* to_string(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::Data: return "data";
    case ConnectionKind::Control: return "control";
    case ConnectionKind::Logical: return "logical";
  }
  return "?";
}

bool literal_matches(const Literal& literal, DataType type) {
  if (std::holds_alternative<bool>(literal)) return type == DataType::Bool;
  if (std::holds_alternative<std::int64_t>(literal)) {
    const auto v = std::get<std::int64_t>(literal);
    switch (type) {
      case DataType::Int: return v >= -32768 && v <= 32767;
      case DataType::Dint: return v >= INT32_MIN && v <= INT32_MAX;
      case DataType::Real:
      case DataType::Lreal: return true;
      case DataType::Bool: return false;
    }
  }
  return is_real(type);
}

std::vector<std::vector<std::string>> find_refine_cycles(const Model& model) {
  std::map<std::string, std::vector<std::string>> edges;
  std::map<std::string, std::string> spelling;  // upper-cased id -> declared id
  for (const auto& rel : model.relations)
    if (rel.kind == RelationKind::Refine) {
      edges[to_upper(rel.source)].push_back(to_upper(rel.target));
      spelling.emplace(to_upper(rel.source), rel.source);
      spelling.emplace(to_upper(rel.target), rel.target);
    }
  for (const auto& r : model.requirements) spelling[to_upper(r.id)] = r.id;

  // Iterative-colour DFS; each back edge yields one cycle.
  enum class Colour { White, Grey, Black };
  std::map<std::string, Colour> colour;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;

  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    colour[n] = Colour::Grey;
    stack.push_back(n);
    if (auto it = edges.find(n); it != edges.end()) {
      for (const auto& next : it->second) {
        const Colour c = colour.count(next) ? colour[next] : Colour::White;
        if (c == Colour::White) {
          visit(next);
        } else if (c == Colour::Grey) {
          auto start = std::find(stack.begin(), stack.end(), next);
          cycles.emplace_back(start, stack.end());
        }
      }
    }
    stack.pop_back();
    colour[n] = Colour::Black;
  };

  for (const auto& [node, _] : edges)
    if (!colour.count(node)) visit(node);
  for (auto& cycle : cycles)
    for (auto& id : cycle) id = spelling.at(id);
  return cycles;
}

}  // namespace maspc
