#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"
#include "maspc/model.hpp"

namespace maspc::st {

/// Runtime scalar. Alternative index matches DataType: BOOL, INT (16-bit),
/// DINT (32-bit), REAL (binary32), LREAL (binary64).
using Value = std::variant<bool, std::int16_t, std::int32_t, float, double>;

inline DataType type_of(const Value& v) { return static_cast<DataType>(v.index()); }

Value default_value(DataType t);

/// Bit-exact equality (REALs compared by representation, so NaN == NaN).
bool identical(const Value& a, const Value& b);

/// ST literal text for the value (TRUE, 42, 0.1, 1.0E+20).
std::string format_st_literal(const Value& v);

/// Shortest round-trip text for a double, always carrying '.' or an exponent
/// so it lexes as a REAL literal.
std::string format_real_literal(double v);

nlohmann::json value_to_json(const Value& v);

/// Converts a JSON scalar to a value of type `t`; nullopt when the JSON kind
/// does not fit (bool for BOOL; integer in range for INT/DINT; any number for
/// REAL/LREAL).
std::optional<Value> value_from_json(const nlohmann::json& j, DataType t);

}  // namespace maspc::st
