#include "maspc/st/value.hpp"

#include <charconv>
#include <cstring>

namespace maspc::st {

Value default_value(DataType t) {
  switch (t) {
    case DataType::Bool: return false;
    case DataType::Int: return std::int16_t{0};
    case DataType::Dint: return std::int32_t{0};
    case DataType::Real: return 0.0f;
    case DataType::Lreal: return 0.0;
  }
  return false;
}

bool identical(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        if constexpr (std::is_floating_point_v<T>) return std::memcmp(&x, &y, sizeof(T)) == 0;
        else return x == y;
      },
      a);
}

namespace {

template <typename F>
std::string shortest(F v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) {
    s += ".0";
  } else if (auto e = s.find('e'); e != std::string::npos && s.find('.') == std::string::npos) {
    s.insert(e, ".0");
  }
  for (auto& c : s)
    if (c == 'e') c = 'E';
  return s;
}

}  // namespace

std::string format_real_literal(double v) { return shortest(v); }

std::string format_st_literal(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) return x ? "TRUE" : "FALSE";
        else if constexpr (std::is_integral_v<T>) return std::to_string(x);
        else return shortest(x);
      },
      v);
}

nlohmann::json value_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, float>) return static_cast<double>(x);
        else return x;
      },
      v);
}

std::optional<Value> value_from_json(const nlohmann::json& j, DataType t) {
  switch (t) {
    case DataType::Bool:
      if (j.is_boolean()) return Value{j.get<bool>()};
      return std::nullopt;
    case DataType::Int:
    case DataType::Dint: {
      if (!j.is_number_integer()) return std::nullopt;
      if (j.is_number_unsigned() && j.get<std::uint64_t>() > INT32_MAX) return std::nullopt;
      const auto v = j.get<std::int64_t>();
      if (t == DataType::Int) {
        if (v < INT16_MIN || v > INT16_MAX) return std::nullopt;
        return Value{static_cast<std::int16_t>(v)};
      }
      if (v < INT32_MIN || v > INT32_MAX) return std::nullopt;
      return Value{static_cast<std::int32_t>(v)};
    }
    case DataType::Real:
      if (!j.is_number()) return std::nullopt;
      return Value{static_cast<float>(j.get<double>())};
    case DataType::Lreal:
      if (!j.is_number()) return std::nullopt;
      return Value{j.get<double>()};
  }
  return std::nullopt;
}

}  // namespace maspc::st
