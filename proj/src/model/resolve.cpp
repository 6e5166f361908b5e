#include "maspc/resolve.hpp"

#include <algorithm>

#include "maspc/identifier.hpp"

namespace maspc {

std::string block_path(std::size_t block_index) { return "/blocks/" + std::to_string(block_index); }

struct ResolveAccess {
  using Kind = ResolvedModel::Entry::Kind;

  static void attach(ResolvedModel& rm, Model model) { rm.model_ = std::make_shared<const Model>(std::move(model)); }

  static void index(ResolvedModel& rm, Diagnostics& diags) {
    const Model& m = *rm.model_;
    auto add = [&](const std::string& id, std::string path, const void* ptr, Kind kind) {
      auto [it, inserted] = rm.by_id_.try_emplace(to_upper(id), ResolvedModel::Entry{path, ptr, kind});
      if (!inserted)
        diags.push_back(make_error("E_DUPLICATE_ID", path + "/id",
                                   "id '" + id + "' already used at " + it->second.path));
    };
    for (std::size_t i = 0; i < m.requirements.size(); ++i)
      add(m.requirements[i].id, "/requirements/" + std::to_string(i), &m.requirements[i],
          Kind::Requirement);
    for (std::size_t i = 0; i < m.functions.size(); ++i) {
      const std::string path = "/functions/" + std::to_string(i);
      if (const auto* af = std::get_if<AutomationFunction>(&m.functions[i]))
        add(af->id, path, af, Kind::Af);
      else if (const auto* sa = std::get_if<SoftwareApplication>(&m.functions[i]))
        add(sa->id, path, sa, Kind::Sa);
    }
    for (std::size_t i = 0; i < m.hardware.size(); ++i) {
      const std::string path = "/hardware/" + std::to_string(i);
      if (const auto* n = std::get_if<Node>(&m.hardware[i]))
        add(n->id, path, n, Kind::Node);
      else if (const auto* d = std::get_if<FieldDevice>(&m.hardware[i]))
        add(d->id, path, d, Kind::Device);
    }
    for (std::size_t i = 0; i < m.connections.size(); ++i)
      add(m.connections[i].id, "/connections/" + std::to_string(i), &m.connections[i],
          Kind::Connection);
    for (std::size_t i = 0; i < m.blocks.size(); ++i) {
      if (const auto* pb = std::get_if<PersistentBlock>(&m.blocks[i]))
        add(pb->id, block_path(i), pb, Kind::Persistent);
      else if (const auto* tb = std::get_if<TransientBlock>(&m.blocks[i]))
        add(tb->id, block_path(i), tb, Kind::Transient);
    }
  }

  static void check_refs(const ResolvedModel& rm, Diagnostics& diags) {
    const Model& m = *rm.model_;
    auto expect = [&](std::string_view id, const std::string& path, std::initializer_list<Kind> kinds,
                      const char* what) {
      auto it = rm.by_id_.find(to_upper(id));
      if (it == rm.by_id_.end()) {
        diags.push_back(make_error("E_UNRESOLVED", path,
                                   std::string(what) + " '" + std::string(id) + "' does not exist"));
        return false;
      }
      if (std::find(kinds.begin(), kinds.end(), it->second.kind) == kinds.end()) {
        diags.push_back(make_error("E_REFERENCE_KIND", path,
                                   "'" + std::string(id) + "' is not a " + what));
        return false;
      }
      return true;
    };

    for (std::size_t i = 0; i < m.relations.size(); ++i) {
      const auto& rel = m.relations[i];
      const std::string path = "/relations/" + std::to_string(i);
      expect(rel.source, path + "/source", {Kind::Requirement}, "requirement");
      if (rel.kind == RelationKind::Refine)
        expect(rel.target, path + "/target", {Kind::Requirement}, "requirement");
      else
        expect(rel.target, path + "/target", {Kind::Af, Kind::Sa, Kind::Node, Kind::Device},
               "modeled element");
    }

    for (std::size_t i = 0; i < m.functions.size(); ++i) {
      const std::string path = "/functions/" + std::to_string(i);
      if (const auto* af = std::get_if<AutomationFunction>(&m.functions[i])) {
        for (std::size_t j = 0; j < af->connections.size(); ++j)
          expect(af->connections[j], path + "/connections/" + std::to_string(j), {Kind::Af},
                 "automation function");
        for (std::size_t j = 0; j < af->children.size(); ++j)
          expect(af->children[j], path + "/children/" + std::to_string(j), {Kind::Sa},
                 "software application");
      } else {
        const auto& sa = std::get<SoftwareApplication>(m.functions[i]);
        expect(sa.behavior, path + "/behavior", {Kind::Persistent}, "persistent block");
      }
    }

    for (std::size_t i = 0; i < m.allocations.size(); ++i) {
      const std::string path = "/allocations/" + std::to_string(i);
      expect(m.allocations[i].sa, path + "/sa", {Kind::Sa}, "software application");
      expect(m.allocations[i].node, path + "/node", {Kind::Node}, "node");
    }

    for (std::size_t i = 0; i < m.connections.size(); ++i) {
      const auto& c = m.connections[i];
      const std::string path = "/connections/" + std::to_string(i);
      auto check_end = [&](const ConnectionEnd& end, const std::string& end_path) {
        if (!expect(end.element, end_path + "/element", {Kind::Af, Kind::Sa, Kind::Node, Kind::Device},
                    "connectable element"))
          return;
        if (end.port.empty()) return;
        const auto& entry = rm.by_id_.at(to_upper(end.element));
        const std::vector<Port>* ports = nullptr;
        switch (entry.kind) {
          case Kind::Sa: ports = &static_cast<const SoftwareApplication*>(entry.ptr)->ports; break;
          case Kind::Node: ports = &static_cast<const Node*>(entry.ptr)->ports; break;
          case Kind::Device: ports = &static_cast<const FieldDevice*>(entry.ptr)->ports; break;
          default: break;
        }
        const bool found = ports && std::any_of(ports->begin(), ports->end(), [&](const Port& p) {
                             return iequals(p.name, end.port);
                           });
        if (!found)
          diags.push_back(make_error("E_UNRESOLVED_FEATURE", end_path + "/port",
                                     "port '" + end.port + "' not found on '" + end.element + "'"));
      };
      check_end(c.source, path + "/source");
      check_end(c.target, path + "/target");
    }
  }

  static void resolve_blocks(ResolvedModel& rm, Diagnostics& diags) {
    const Model& m = *rm.model_;
    for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) {
      const auto* pb = std::get_if<PersistentBlock>(&m.blocks[bi]);
      if (!pb) continue;
      const std::string path = block_path(bi);
      ResolvedPersistentBlock rb;
      rb.block = pb;
      rb.index = bi;

      for (std::size_t i = 0; i < pb->parts.size(); ++i) {
        const auto* t = static_cast<const PersistentBlock*>(rm.lookup(pb->parts[i].type, Kind::Persistent));
        if (!t) {
          diags.push_back(make_error("E_UNRESOLVED", path + "/parts/" + std::to_string(i) + "/type",
                                     "persistent block '" + pb->parts[i].type + "' does not exist"));
        }
        rb.part_types.push_back(t);
      }
      for (std::size_t i = 0; i < pb->constraints.size(); ++i) {
        const auto* t =
            static_cast<const TransientBlock*>(rm.lookup(pb->constraints[i].type, Kind::Transient));
        if (!t) {
          diags.push_back(make_error("E_UNRESOLVED",
                                     path + "/constraints/" + std::to_string(i) + "/type",
                                     "transient block '" + pb->constraints[i].type + "' does not exist"));
        }
        rb.constraint_types.push_back(t);
      }

      for (std::size_t fi = 0; fi < pb->flows.size(); ++fi) {
        const auto& f = pb->flows[fi];
        const std::string fpath = path + "/flows/" + std::to_string(fi);
        ResolvedFlow rf;
        rf.flow = &f;
        rf.index = fi;
        auto src = resolve_end(*pb, rb, f.source);
        auto dst = resolve_end(*pb, rb, f.target);
        if (!src) {
          diags.push_back(make_error("E_UNRESOLVED_FEATURE", fpath + "/source",
                                     "flow source '" + f.source.instance + "." + f.source.feature +
                                         "' does not resolve in block '" + pb->name + "'"));
        }
        if (!dst) {
          diags.push_back(make_error("E_UNRESOLVED_FEATURE", fpath + "/target",
                                     "flow target '" + f.target.instance + "." + f.target.feature +
                                         "' does not resolve in block '" + pb->name + "'"));
        }
        if (src && dst) {
          rf.source = *src;
          rf.target = *dst;
          rb.flows.push_back(rf);
        }
      }
      rm.blocks_.emplace(pb, std::move(rb));
    }
  }

  static std::optional<ResolvedEndpoint> resolve_end(const PersistentBlock& pb,
                                                     const ResolvedPersistentBlock& rb,
                                                     const FlowEnd& end) {
    auto find = [&](const auto& list, std::string_view name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < list.size(); ++i)
        if (iequals(list[i].name, name)) return i;
      return std::nullopt;
    };
    if (iequals(end.instance, kSelfInstance)) {
      if (auto i = find(pb.in_ports, end.feature))
        return ResolvedEndpoint{EndpointKind::SelfInPort, 0, *i, pb.in_ports[*i].type};
      if (auto i = find(pb.out_ports, end.feature))
        return ResolvedEndpoint{EndpointKind::SelfOutPort, 0, *i, pb.out_ports[*i].type};
      if (auto i = find(pb.values, end.feature))
        return ResolvedEndpoint{EndpointKind::SelfValue, 0, *i, pb.values[*i].type};
      return std::nullopt;
    }
    if (auto m = find(pb.parts, end.instance)) {
      const PersistentBlock* t = rb.part_types[*m];
      if (!t) return std::nullopt;
      if (auto i = find(t->in_ports, end.feature))
        return ResolvedEndpoint{EndpointKind::PartInPort, *m, *i, t->in_ports[*i].type};
      if (auto i = find(t->out_ports, end.feature))
        return ResolvedEndpoint{EndpointKind::PartOutPort, *m, *i, t->out_ports[*i].type};
      return std::nullopt;
    }
    if (auto m = find(pb.constraints, end.instance)) {
      const TransientBlock* t = rb.constraint_types[*m];
      if (!t) return std::nullopt;
      if (auto i = find(t->params, end.feature)) {
        const auto& p = t->params[*i];
        return ResolvedEndpoint{
            p.direction == PortDirection::In ? EndpointKind::ConstraintIn : EndpointKind::ConstraintOut,
            *m, *i, p.type};
      }
      return std::nullopt;
    }
    return std::nullopt;
  }
};

const void* ResolvedModel::lookup(std::string_view id, Entry::Kind kind) const {
  auto it = by_id_.find(to_upper(id));
  if (it == by_id_.end() || it->second.kind != kind) return nullptr;
  return it->second.ptr;
}

const Requirement* ResolvedModel::find_requirement(std::string_view id) const {
  return static_cast<const Requirement*>(lookup(id, Entry::Kind::Requirement));
}
const AutomationFunction* ResolvedModel::find_af(std::string_view id) const {
  return static_cast<const AutomationFunction*>(lookup(id, Entry::Kind::Af));
}
const SoftwareApplication* ResolvedModel::find_sa(std::string_view id) const {
  return static_cast<const SoftwareApplication*>(lookup(id, Entry::Kind::Sa));
}
const Node* ResolvedModel::find_node(std::string_view id) const {
  return static_cast<const Node*>(lookup(id, Entry::Kind::Node));
}
const FieldDevice* ResolvedModel::find_device(std::string_view id) const {
  return static_cast<const FieldDevice*>(lookup(id, Entry::Kind::Device));
}
const PersistentBlock* ResolvedModel::find_persistent(std::string_view id) const {
  return static_cast<const PersistentBlock*>(lookup(id, Entry::Kind::Persistent));
}
const TransientBlock* ResolvedModel::find_transient(std::string_view id) const {
  return static_cast<const TransientBlock*>(lookup(id, Entry::Kind::Transient));
}
const Connection* ResolvedModel::find_connection(std::string_view id) const {
  return static_cast<const Connection*>(lookup(id, Entry::Kind::Connection));
}

bool ResolvedModel::has_element(std::string_view id) const { return by_id_.count(to_upper(id)) != 0; }

std::string ResolvedModel::path_of(std::string_view id) const {
  auto it = by_id_.find(to_upper(id));
  return it == by_id_.end() ? std::string{} : it->second.path;
}

std::vector<const AutomationFunction*> ResolvedModel::afs() const {
  std::vector<const AutomationFunction*> out;
  for (const auto& f : model_->functions)
    if (const auto* af = std::get_if<AutomationFunction>(&f)) out.push_back(af);
  return out;
}
std::vector<const SoftwareApplication*> ResolvedModel::sas() const {
  std::vector<const SoftwareApplication*> out;
  for (const auto& f : model_->functions)
    if (const auto* sa = std::get_if<SoftwareApplication>(&f)) out.push_back(sa);
  return out;
}
std::vector<const Node*> ResolvedModel::nodes() const {
  std::vector<const Node*> out;
  for (const auto& h : model_->hardware)
    if (const auto* n = std::get_if<Node>(&h)) out.push_back(n);
  return out;
}
std::vector<const FieldDevice*> ResolvedModel::devices() const {
  std::vector<const FieldDevice*> out;
  for (const auto& h : model_->hardware)
    if (const auto* d = std::get_if<FieldDevice>(&h)) out.push_back(d);
  return out;
}
std::vector<const PersistentBlock*> ResolvedModel::persistent_blocks() const {
  std::vector<const PersistentBlock*> out;
  for (const auto& b : model_->blocks)
    if (const auto* pb = std::get_if<PersistentBlock>(&b)) out.push_back(pb);
  return out;
}
std::vector<const TransientBlock*> ResolvedModel::transient_blocks() const {
  std::vector<const TransientBlock*> out;
  for (const auto& b : model_->blocks)
    if (const auto* tb = std::get_if<TransientBlock>(&b)) out.push_back(tb);
  return out;
}

std::vector<const Node*> ResolvedModel::allocations_of(const SoftwareApplication& sa) const {
  std::vector<const Node*> out;
  for (const auto& a : model_->allocations)
    if (iequals(a.sa, sa.id))
      if (const Node* n = find_node(a.node)) out.push_back(n);
  return out;
}

const Node* ResolvedModel::node_of(const SoftwareApplication& sa) const {
  for (const auto& a : model_->allocations)
    if (iequals(a.sa, sa.id)) return find_node(a.node);
  return nullptr;
}

std::vector<const SoftwareApplication*> ResolvedModel::allocated_to(const Node& node) const {
  std::vector<const SoftwareApplication*> out;
  for (const auto& a : model_->allocations) {
    if (!iequals(a.node, node.id)) continue;
    const SoftwareApplication* sa = find_sa(a.sa);
    if (sa && std::find(out.begin(), out.end(), sa) == out.end()) out.push_back(sa);
  }
  return out;
}

const ResolvedPersistentBlock& ResolvedModel::resolved(const PersistentBlock& block) const {
  return blocks_.at(&block);
}

Resolution resolve_model(Model model) {
  auto rm = std::make_shared<ResolvedModel>();
  ResolveAccess::attach(*rm, std::move(model));
  Diagnostics diags;
  ResolveAccess::index(*rm, diags);
  ResolveAccess::check_refs(*rm, diags);
  ResolveAccess::resolve_blocks(*rm, diags);
  Resolution out;
  out.diagnostics = std::move(diags);
  if (!has_errors(out.diagnostics)) out.model = std::move(rm);
  return out;
}

std::shared_ptr<const ResolvedModel> resolve_or_throw(Model model) {
  auto res = resolve_model(std::move(model));
  if (res.model) return res.model;
  for (const auto& d : res.diagnostics) {
    if (d.code == "E_UNRESOLVED") {
      // message form: "<what> '<id>' does not exist"
      auto b = d.message.find('\'');
      auto e = d.message.find('\'', b + 1);
      throw UnresolvedReference(d.path, d.message.substr(b + 1, e - b - 1));
    }
  }
  throw Error(res.diagnostics.front().code, res.diagnostics.front().message);
}

}  // namespace maspc
