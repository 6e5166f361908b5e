#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maspc/diagnostic.hpp"
#include "maspc/resolve.hpp"

namespace maspc {

/// One side of an exchanged variable.
struct CommEndpoint {
  std::string node;  // node id
  std::optional<std::string> ams_net_id;
  std::string bus_address;
  std::string sa;    // SA id
  std::string port;

  bool operator==(const CommEndpoint&) const = default;
};

struct CommEntry {
  std::string variable;
  DataType type = DataType::Bool;
  std::string connection;  // connection id
  CommEndpoint publisher;
  CommEndpoint subscriber;

  bool operator==(const CommEntry&) const = default;
};

struct CommConfig {
  std::vector<CommEntry> entries;  // sorted by (publisher node, variable)

  bool operator==(const CommConfig&) const = default;
};

/// Publisher/subscriber plan for every data connection whose two SAs are
/// allocated to different nodes. Throws Error(E_MISSING_ADDRESS) when a
/// participating node has neither an AMSNetId nor a bus address.
CommConfig derive_pubsub(const ResolvedModel& model);

/// Diagnostic form of the address check, for the validator.
Diagnostics check_comm_addresses(const ResolvedModel& model);

/// Canonical JSON text (2-space indent, trailing newline).
std::string emit_comm_config(const CommConfig& config);

/// Reads back what emit_comm_config wrote. Throws Error(E_SYNTAX).
CommConfig parse_comm_config(std::string_view text);

}  // namespace maspc
