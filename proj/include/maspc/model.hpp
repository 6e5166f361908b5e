#pragma once

// SysML-AT metamodel as plain data. References between elements are kept
// as identifier strings here; see resolve.hpp for the checked view.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace maspc {

enum class DataType { Bool, Int, Dint, Real, Lreal };

inline constexpr DataType kAllDataTypes[] = {DataType::Bool, DataType::Int, DataType::Dint,
                                             DataType::Real, DataType::Lreal};

const char* to_string(DataType t);
std::optional<DataType> parse_data_type(std::string_view text);

bool is_integer(DataType t);
bool is_real(DataType t);

/// True iff `from` may be stored in `to`: equal types always, plus the
/// lossless widenings INT->DINT and REAL->LREAL when `allow_widening` is set.
bool type_compatible(DataType from, DataType to, bool allow_widening);

/// True iff `from` != `to` and `from` widens losslessly to `to`.
bool widens_to(DataType from, DataType to);

enum class PortDirection { In, Out };

const char* to_string(PortDirection d);

/// Scalar carried by NFR properties and initial values.
using Scalar = std::variant<bool, std::int64_t, double, std::string>;

// ---------------------------------------------------------------------------
// Requirements

enum class RequirementKind { Functional, NonFunctional };

struct NfrProperty {
  std::string key;
  Scalar value;
  std::string unit;

  bool operator==(const NfrProperty&) const = default;
};

struct Requirement {
  std::string id;
  std::string name;
  std::string text;
  RequirementKind kind = RequirementKind::Functional;
  std::vector<NfrProperty> properties;

  bool operator==(const Requirement&) const = default;
};

enum class RelationKind { Refine, Validity };

struct RequirementRelation {
  RelationKind kind = RelationKind::Refine;
  std::string source;
  std::string target;

  bool operator==(const RequirementRelation&) const = default;
};

// ---------------------------------------------------------------------------
// Functions and software applications

/// Port on an SA, node, sensor or actuator.
struct Port {
  std::string name;
  PortDirection direction = PortDirection::In;
  DataType type = DataType::Bool;

  bool operator==(const Port&) const = default;
};

struct AutomationFunction {
  std::string id;
  std::string name;
  std::vector<std::string> connections;  // logically linked AF ids
  std::vector<std::string> children;     // realizing SA ids

  bool operator==(const AutomationFunction&) const = default;
};

struct SoftwareApplication {
  std::string id;
  std::string name;
  std::vector<Port> ports;
  std::string behavior;  // PersistentBlock id
  std::optional<double> execution_time_ms;

  bool operator==(const SoftwareApplication&) const = default;
};

using FunctionElement = std::variant<AutomationFunction, SoftwareApplication>;

// ---------------------------------------------------------------------------
// Hardware

struct Node {
  std::string id;
  std::string name;
  std::optional<std::string> vendor_stereotype;  // e.g. "Beckhoff CX"
  std::string bus_type;
  std::string bus_address;
  std::optional<std::string> ams_net_id;
  double cycle_time_ms = 0.0;
  double memory_kb = 0.0;
  std::vector<Port> ports;

  bool operator==(const Node&) const = default;
};

enum class DeviceKind { Sensor, Actuator };

/// Sensor or actuator.
struct FieldDevice {
  DeviceKind kind = DeviceKind::Sensor;
  std::string id;
  std::string name;
  std::string device_type;
  std::string bus_type;
  std::string bus_address;
  std::vector<Port> ports;

  bool operator==(const FieldDevice&) const = default;
};

using HardwareElement = std::variant<Node, FieldDevice>;

// ---------------------------------------------------------------------------
// Deployment

struct Allocation {
  std::string sa;
  std::string node;

  bool operator==(const Allocation&) const = default;
};

enum class ConnectionKind { Data, Control, Logical };

const char* to_string(ConnectionKind k);

struct ConnectionEnd {
  std::string element;
  std::string port;  // empty for logical connections between AFs

  bool operator==(const ConnectionEnd&) const = default;
};

struct Connection {
  std::string id;
  ConnectionKind kind = ConnectionKind::Data;
  ConnectionEnd source;
  ConnectionEnd target;

  bool operator==(const Connection&) const = default;
};

// ---------------------------------------------------------------------------
// Blocks (parametric behavior)

/// InPort / OutPort of a PersistentBlock.
struct BlockPort {
  std::string name;
  DataType type = DataType::Bool;

  bool operator==(const BlockPort&) const = default;
};

/// FB instance. orderNumber 0 declares the instance without invoking it.
struct PartProperty {
  std::string name;
  std::string type;  // PersistentBlock id
  std::int64_t order = 0;

  bool operator==(const PartProperty&) const = default;
};

using Literal = std::variant<bool, std::int64_t, double>;

struct ValueProperty {
  std::string name;
  DataType type = DataType::Bool;
  std::optional<Literal> initial;

  bool operator==(const ValueProperty&) const = default;
};

/// FC invocation.
struct ConstraintProperty {
  std::string name;
  std::string type;  // TransientBlock id
  std::int64_t order = 0;

  bool operator==(const ConstraintProperty&) const = default;
};

/// Name of the implicit instance denoting the owning block.
inline constexpr std::string_view kSelfInstance = "self";

struct FlowEnd {
  std::string instance;  // member name or "self"
  std::string feature;

  bool operator==(const FlowEnd&) const = default;
};

struct OrderedFlow {
  FlowEnd source;
  FlowEnd target;
  std::int64_t order = 0;

  bool operator==(const OrderedFlow&) const = default;
};

struct PersistentBlock {
  std::string id;
  std::string name;
  std::vector<BlockPort> in_ports;
  std::vector<BlockPort> out_ports;
  std::vector<ValueProperty> values;
  std::vector<PartProperty> parts;
  std::vector<ConstraintProperty> constraints;
  std::vector<OrderedFlow> flows;

  bool operator==(const PersistentBlock&) const = default;
};

struct ConstraintParameter {
  std::string name;
  PortDirection direction = PortDirection::In;
  DataType type = DataType::Bool;

  bool operator==(const ConstraintParameter&) const = default;
};

struct TransientBlock {
  std::string id;
  std::string name;
  std::vector<ConstraintParameter> params;
  std::vector<std::string> body;  // Structured Text statements

  bool operator==(const TransientBlock&) const = default;
};

using Block = std::variant<PersistentBlock, TransientBlock>;

// ---------------------------------------------------------------------------

inline constexpr std::string_view kFormatVersion = "1.0.0";

struct Model {
  std::string format_version{kFormatVersion};
  std::vector<Requirement> requirements;
  std::vector<RequirementRelation> relations;
  std::vector<FunctionElement> functions;
  std::vector<HardwareElement> hardware;
  std::vector<Allocation> allocations;
  std::vector<Connection> connections;
  std::vector<Block> blocks;

  bool operator==(const Model&) const = default;
};

/// Returns true when `literal` can initialize a variable of type `type`.
bool literal_matches(const Literal& literal, DataType type);

/// Finds the Refine cycles in `model`. Each cycle is reported as the list of
/// requirement ids along it; empty when the Refine graph is acyclic.
std::vector<std::vector<std::string>> find_refine_cycles(const Model& model);

}  // namespace maspc
