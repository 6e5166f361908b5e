#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "maspc/diagnostic.hpp"
#include "maspc/error.hpp"
#include "maspc/model.hpp"

namespace maspc {

class UnresolvedReference : public Error {
 public:
  UnresolvedReference(std::string path, std::string id)
      : Error("E_UNRESOLVED", "unresolved reference '" + id + "' at " + path),
        path_(std::move(path)),
        id_(std::move(id)) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& id() const noexcept { return id_; }

 private:
  std::string path_;
  std::string id_;
};

/// What an OrderedFlow endpoint designates inside its owning block.
enum class EndpointKind {
  SelfInPort,
  SelfOutPort,
  SelfValue,
  PartInPort,
  PartOutPort,
  ConstraintIn,
  ConstraintOut,
};

struct ResolvedEndpoint {
  EndpointKind kind = EndpointKind::SelfInPort;
  std::size_t member = 0;   // index into parts / constraints (unused for self)
  std::size_t feature = 0;  // index into the port / value / parameter list
  DataType type = DataType::Bool;

  bool is_self() const {
    return kind == EndpointKind::SelfInPort || kind == EndpointKind::SelfOutPort ||
           kind == EndpointKind::SelfValue;
  }
  bool is_constraint() const {
    return kind == EndpointKind::ConstraintIn || kind == EndpointKind::ConstraintOut;
  }
  bool is_part() const { return kind == EndpointKind::PartInPort || kind == EndpointKind::PartOutPort; }
  /// Readable as an assignment source.
  bool readable() const {
    return kind == EndpointKind::SelfInPort || kind == EndpointKind::SelfOutPort ||
           kind == EndpointKind::SelfValue || kind == EndpointKind::PartOutPort ||
           kind == EndpointKind::ConstraintOut;
  }
  /// Writable as an assignment target.
  bool writable() const {
    return kind == EndpointKind::SelfOutPort || kind == EndpointKind::SelfValue ||
           kind == EndpointKind::PartInPort || kind == EndpointKind::ConstraintIn;
  }
};

struct ResolvedFlow {
  const OrderedFlow* flow = nullptr;
  std::size_t index = 0;
  ResolvedEndpoint source;
  ResolvedEndpoint target;

  /// The constraint property this flow is attached to, if any.
  std::optional<std::size_t> attached_constraint() const {
    if (source.is_constraint()) return source.member;
    if (target.is_constraint()) return target.member;
    return std::nullopt;
  }
};

struct ResolvedPersistentBlock {
  const PersistentBlock* block = nullptr;
  std::size_t index = 0;  // position in Model::blocks
  std::vector<const PersistentBlock*> part_types;
  std::vector<const TransientBlock*> constraint_types;
  std::vector<ResolvedFlow> flows;
};

/// Checked, immutable view of a Model. All id references are guaranteed to
/// resolve; lookups are case-insensitive.
class ResolvedModel {
 public:
  const Model& model() const { return *model_; }

  const Requirement* find_requirement(std::string_view id) const;
  const AutomationFunction* find_af(std::string_view id) const;
  const SoftwareApplication* find_sa(std::string_view id) const;
  const Node* find_node(std::string_view id) const;
  const FieldDevice* find_device(std::string_view id) const;
  const PersistentBlock* find_persistent(std::string_view id) const;
  const TransientBlock* find_transient(std::string_view id) const;
  const Connection* find_connection(std::string_view id) const;

  /// True iff some element carries this id.
  bool has_element(std::string_view id) const;

  /// JSON pointer of the element with this id in the canonical document.
  std::string path_of(std::string_view id) const;

  std::vector<const AutomationFunction*> afs() const;
  std::vector<const SoftwareApplication*> sas() const;
  std::vector<const Node*> nodes() const;
  std::vector<const FieldDevice*> devices() const;
  std::vector<const PersistentBlock*> persistent_blocks() const;
  std::vector<const TransientBlock*> transient_blocks() const;

  /// All nodes an SA is allocated to (normally exactly one).
  std::vector<const Node*> allocations_of(const SoftwareApplication& sa) const;
  /// The first allocation, or nullptr.
  const Node* node_of(const SoftwareApplication& sa) const;
  /// SAs allocated to a node, in allocation-list order.
  std::vector<const SoftwareApplication*> allocated_to(const Node& node) const;

  const ResolvedPersistentBlock& resolved(const PersistentBlock& block) const;

  std::size_t block_index(const PersistentBlock& block) const { return resolved(block).index; }

 private:
  friend struct ResolveAccess;

  struct Entry {
    std::string path;
    const void* ptr = nullptr;
    enum class Kind { Requirement, Af, Sa, Node, Device, Persistent, Transient, Connection } kind;
  };

  const void* lookup(std::string_view id, Entry::Kind kind) const;

  std::shared_ptr<const Model> model_;
  std::unordered_map<std::string, Entry> by_id_;  // upper-cased id
  std::unordered_map<const PersistentBlock*, ResolvedPersistentBlock> blocks_;
};

struct Resolution {
  std::shared_ptr<const ResolvedModel> model;  // null iff diagnostics contain errors
  Diagnostics diagnostics;
};

/// Replaces every id reference with a checked link. Unresolved references,
/// duplicate ids and unresolvable flow endpoints are reported as errors
/// (E_UNRESOLVED, E_DUPLICATE_ID, E_UNRESOLVED_FEATURE); the first one is the
/// first missing target in document order.
Resolution resolve_model(Model model);

/// As resolve_model, but throws UnresolvedReference for the first missing
/// target (or Error for other resolution failures).
std::shared_ptr<const ResolvedModel> resolve_or_throw(Model model);

/// Paths of the canonical document sections.
std::string block_path(std::size_t block_index);

}  // namespace maspc
