#include "maspc/validator.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "json.hpp"
#include "maspc/codegen.hpp"
#include "maspc/comm_config.hpp"
#include "maspc/identifier.hpp"
#include "maspc/st/program.hpp"

namespace maspc {

namespace {

bool reserved_block_name(std::string_view name) {
  return iequals(name, kProgramName) || st::find_intrinsic(to_upper(name)).has_value();
}

std::string idx(std::size_t i) { return std::to_string(i); }

bool part_cycle_through(const ResolvedModel& rm, const PersistentBlock& start) {
  std::set<const PersistentBlock*> seen;
  std::function<bool(const PersistentBlock&)> reaches = [&](const PersistentBlock& pb) {
    for (const auto* t : rm.resolved(pb).part_types) {
      if (!t) continue;
      if (t == &start) return true;
      if (seen.insert(t).second && reaches(*t)) return true;
    }
    return false;
  };
  return reaches(start);
}

void type_check(Diagnostics& out, DataType from, DataType to, const ValidateOptions& opts, const std::string& path,
                const std::string& what) {
  if (from == to) return;
  if (widens_to(from, to)) {
    if (opts.allow_widening) {
      out.push_back(make_warning("W_WIDEN", path,
                                 what + " widens " + to_string(from) + " to " + to_string(to)));
    } else {
      out.push_back(make_error("E_TYPE_INCOMPAT", path,
                               what + " connects " + to_string(from) + " to " + to_string(to) +
                                   " (widening needs --allow-widening)"));
    }
    return;
  }
  out.push_back(make_error("E_TYPE_INCOMPAT", path, what + " connects " + to_string(from) + " to " + to_string(to)));
}

const std::vector<Port>* ports_of(const ResolvedModel& rm, std::string_view id) {
  if (const auto* sa = rm.find_sa(id)) return &sa->ports;
  if (const auto* n = rm.find_node(id)) return &n->ports;
  if (const auto* d = rm.find_device(id)) return &d->ports;
  return nullptr;
}

const Port* port_of(const ResolvedModel& rm, const ConnectionEnd& end) {
  const auto* ports = ports_of(rm, end.element);
  if (!ports) return nullptr;
  for (const auto& p : *ports)
    if (iequals(p.name, end.port)) return &p;
  return nullptr;
}

bool valid_ams_net_id(const std::string& s) {
  int fields = 0;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find('.', i);
    if (j == std::string::npos) j = s.size();
    const std::string part = s.substr(i, j - i);
    if (part.empty() || part.size() > 3) return false;
    for (char c : part)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    if (std::stoi(part) > 255) return false;
    ++fields;
    i = j + 1;
  }
  return fields == 6;
}

/// Milliseconds for a time-valued NFR property, or nullopt if it is not one.
std::optional<double> time_bound_ms(const NfrProperty& p) {
  const std::string key = to_upper(p.key);
  if (key.size() < 4 || key.compare(key.size() - 4, 4, "TIME") != 0) return std::nullopt;
  double v = 0;
  if (const auto* i = std::get_if<std::int64_t>(&p.value))
    v = static_cast<double>(*i);
  else if (const auto* d = std::get_if<double>(&p.value))
    v = *d;
  else
    return std::nullopt;
  const std::string unit = to_upper(p.unit);
  if (unit.empty() || unit == "MS") return v;
  if (unit == "S") return v * 1000.0;
  if (unit == "US" || unit == "\xC2\xB5S") return v / 1000.0;
  return std::nullopt;
}

std::string format_ms(double v) {
  std::string s = nlohmann::json(v).dump();
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s + " ms";
}

}  // namespace

Diagnostics validate_block_restrictions(const ResolvedModel& rm, const PersistentBlock& pb) {
  Diagnostics out;
  const ResolvedPersistentBlock& rb = rm.resolved(pb);
  const std::string path = block_path(rb.index);

  if (reserved_block_name(pb.name))
    out.push_back(make_error("E_RESERVED_NAME", path + "/name", "block name '" + pb.name + "' is reserved"));
  if (part_cycle_through(rm, pb))
    out.push_back(make_error("E_BLOCK_RECURSION", path, "block '" + pb.name + "' contains itself through its parts"));

  std::map<std::int64_t, std::string> orders;  // order -> first user's path
  auto claim = [&](std::int64_t order, const std::string& p, const std::string& what) {
    auto [it, inserted] = orders.emplace(order, p);
    if (!inserted)
      out.push_back(make_error("E_DUP_ORDER", p,
                               what + " reuses orderNumber " + std::to_string(order) + " of " + it->second));
  };

  for (std::size_t i = 0; i < pb.parts.size(); ++i) {
    const auto& part = pb.parts[i];
    const std::string p = path + "/parts/" + idx(i) + "/orderNumber";
    if (part.order < 0)
      out.push_back(make_error("E_ORDER_NONPOSITIVE", p, "part '" + part.name + "' has a negative orderNumber"));
    else if (part.order > 0)
      claim(part.order, p, "part '" + part.name + "'");
  }
  for (std::size_t i = 0; i < pb.constraints.size(); ++i) {
    const auto& cp = pb.constraints[i];
    const std::string p = path + "/constraints/" + idx(i) + "/orderNumber";
    if (cp.order <= 0)
      out.push_back(make_error("E_ORDER_NONPOSITIVE", p,
                               "constraint '" + cp.name + "' must have an orderNumber greater than zero"));
    else
      claim(cp.order, p, "constraint '" + cp.name + "'");
  }

  for (const auto& f : rb.flows) {
    const std::string p = path + "/flows/" + idx(f.index);
    const std::string text = f.flow->source.instance + "." + f.flow->source.feature + " -> " +
                             f.flow->target.instance + "." + f.flow->target.feature;
    if (f.source.is_constraint() && f.target.is_constraint()) {
      out.push_back(make_error("E_FC_CHAIN", p, "flow " + text + " joins two constraint parameters"));
      continue;
    }
    if (!f.source.readable())
      out.push_back(make_error("E_FLOW_DIRECTION", p + "/source", "flow " + text + " reads from an input"));
    if (!f.target.writable())
      out.push_back(make_error("E_FLOW_DIRECTION", p + "/target", "flow " + text + " writes to an output"));
    if (f.attached_constraint()) {
      if (f.flow->order != 0)
        out.push_back(make_error("E_FC_FLOW_NONZERO", p + "/orderNumber",
                                 "flow " + text + " is attached to a constraint and must have orderNumber 0"));
    } else if (f.flow->order <= 0) {
      out.push_back(make_error("E_ORDER_NONPOSITIVE", p + "/orderNumber",
                               "flow " + text + " must have an orderNumber greater than zero"));
    } else {
      claim(f.flow->order, p + "/orderNumber", "flow " + text);
    }
  }

  for (std::size_t ci = 0; ci < pb.constraints.size(); ++ci) {
    const TransientBlock* tb = rb.constraint_types[ci];
    if (!tb) continue;
    const std::string p = path + "/constraints/" + idx(ci);
    std::map<std::size_t, int> bindings;
    int outs = 0;
    for (const auto& f : rb.flows) {
      if (f.source.is_constraint() && f.target.is_constraint()) continue;
      if (f.target.kind == EndpointKind::ConstraintIn && f.target.member == ci) ++bindings[f.target.feature];
      if (f.source.kind == EndpointKind::ConstraintOut && f.source.member == ci) ++outs;
    }
    for (std::size_t pi = 0; pi < tb->params.size(); ++pi) {
      if (tb->params[pi].direction != PortDirection::In) continue;
      const int n = bindings[pi];
      if (n == 0)
        out.push_back(make_error("E_UNBOUND_FC_PARAM", p,
                                 "parameter '" + tb->params[pi].name + "' of '" + pb.constraints[ci].name +
                                     "' is not bound by a flow"));
      else if (n > 1)
        out.push_back(make_error("E_FC_MULTI_BIND", p,
                                 "parameter '" + tb->params[pi].name + "' of '" + pb.constraints[ci].name +
                                     "' is bound by " + std::to_string(n) + " flows"));
    }
    if (outs > 1)
      out.push_back(make_error("E_FC_MULTI_BIND", p,
                               "result of '" + pb.constraints[ci].name + "' leaves through " + std::to_string(outs) +
                                   " flows; at most one is allowed"));
  }
  return out;
}

Diagnostics validate_block_restrictions(const TransientBlock& tb, const std::string& path) {
  Diagnostics out;
  if (reserved_block_name(tb.name))
    out.push_back(make_error("E_RESERVED_NAME", path + "/name", "block name '" + tb.name + "' is reserved"));
  const auto outs = std::count_if(tb.params.begin(), tb.params.end(),
                                  [](const ConstraintParameter& p) { return p.direction == PortDirection::Out; });
  if (outs != 1) {
    out.push_back(make_error("E_TB_OUT_COUNT", path + "/params",
                             "transient block '" + tb.name + "' has " + std::to_string(outs) +
                                 " out parameters; exactly one is required"));
    return out;
  }
  try {
    generate_function(tb);
  } catch (const Error& e) {
    out.push_back(make_error("E_BODY_PARSE", path + "/body", e.what()));
  }
  return out;
}

Diagnostics validate_connections(const ResolvedModel& rm, const ValidateOptions& opts) {
  Diagnostics out;
  const auto& conns = rm.model().connections;
  for (std::size_t i = 0; i < conns.size(); ++i) {
    const Connection& c = conns[i];
    if (c.kind != ConnectionKind::Data) continue;
    const std::string p = "/connections/" + idx(i);
    const Port* src = port_of(rm, c.source);
    const Port* dst = port_of(rm, c.target);
    if (!src || !dst) {
      out.push_back(make_error("E_CONNECTION_ENDPOINT", p,
                               "data connection '" + c.id + "' must join two ports of SAs, nodes or devices"));
      continue;
    }
    if (src->direction != PortDirection::Out)
      out.push_back(make_error("E_FLOW_DIRECTION", p + "/source", "data connection '" + c.id + "' starts at in-port '" +
                                                                      c.source.port + "'"));
    if (dst->direction != PortDirection::In)
      out.push_back(make_error("E_FLOW_DIRECTION", p + "/target", "data connection '" + c.id + "' ends at out-port '" +
                                                                      c.target.port + "'"));
    type_check(out, src->type, dst->type, opts, p, "data connection '" + c.id + "'");
  }

  for (const PersistentBlock* pb : rm.persistent_blocks()) {
    const auto& rb = rm.resolved(*pb);
    for (const auto& f : rb.flows)
      type_check(out, f.source.type, f.target.type, opts, block_path(rb.index) + "/flows/" + idx(f.index),
                 "flow " + f.flow->source.instance + "." + f.flow->source.feature + " -> " + f.flow->target.instance +
                     "." + f.flow->target.feature);
  }
  return out;
}

Diagnostics validate_system(const ResolvedModel& rm) {
  Diagnostics out;
  const Model& m = rm.model();

  for (const SoftwareApplication* sa : rm.sas()) {
    const auto nodes = rm.allocations_of(*sa);
    if (nodes.empty())
      out.push_back(make_error("E_SA_UNALLOCATED", rm.path_of(sa->id), "SA '" + sa->name + "' is not allocated to a node"));
    else if (nodes.size() > 1)
      out.push_back(make_error("E_SA_MULTI_ALLOC", rm.path_of(sa->id),
                               "SA '" + sa->name + "' is allocated to " + std::to_string(nodes.size()) + " nodes"));

    const PersistentBlock* pb = rm.find_persistent(sa->behavior);
    if (!pb) continue;
    auto block_port = [&](const Port& port) -> const BlockPort* {
      const auto& list = port.direction == PortDirection::In ? pb->in_ports : pb->out_ports;
      for (const auto& bp : list)
        if (iequals(bp.name, port.name)) return &bp;
      return nullptr;
    };
    for (std::size_t i = 0; i < sa->ports.size(); ++i) {
      const BlockPort* bp = block_port(sa->ports[i]);
      if (!bp || bp->type != sa->ports[i].type)
        out.push_back(make_error("E_PORT_MISMATCH", rm.path_of(sa->id) + "/ports/" + idx(i),
                                 "SA port '" + sa->ports[i].name + "' has no " + to_string(sa->ports[i].direction) +
                                     "-port of the same type on behavior '" + pb->name + "'"));
    }
    auto sa_has = [&](const BlockPort& bp, PortDirection dir) {
      return std::any_of(sa->ports.begin(), sa->ports.end(),
                         [&](const Port& p) { return p.direction == dir && iequals(p.name, bp.name); });
    };
    for (const auto& bp : pb->in_ports)
      if (!sa_has(bp, PortDirection::In))
        out.push_back(make_error("E_PORT_MISMATCH", rm.path_of(sa->id) + "/ports",
                                 "behavior in-port '" + bp.name + "' is missing on SA '" + sa->name + "'"));
    for (const auto& bp : pb->out_ports)
      if (!sa_has(bp, PortDirection::Out))
        out.push_back(make_error("E_PORT_MISMATCH", rm.path_of(sa->id) + "/ports",
                                 "behavior out-port '" + bp.name + "' is missing on SA '" + sa->name + "'"));
  }

  for (const AutomationFunction* af : rm.afs())
    if (af->children.empty())
      out.push_back(make_error("E_AF_UNREALIZED", rm.path_of(af->id), "AF '" + af->name + "' has no realizing SA"));

  for (const auto& cycle : find_refine_cycles(m)) {
    std::string text;
    for (const auto& id : cycle) text += (text.empty() ? "" : " -> ") + id;
    out.push_back(make_error("E_REFINE_CYCLE", rm.path_of(cycle.front()), "Refine cycle: " + text));
  }

  for (const Requirement& r : m.requirements) {
    if (r.kind != RequirementKind::Functional) continue;
    const bool traced = std::any_of(m.relations.begin(), m.relations.end(),
                                    [&](const RequirementRelation& rel) { return iequals(rel.source, r.id); });
    if (!traced)
      out.push_back(make_warning("W_UNTRACED", rm.path_of(r.id),
                                 "functional requirement '" + r.name + "' has no Refine child and no Validity link"));
  }

  for (const Node* n : rm.nodes()) {
    if (n->ams_net_id && !valid_ams_net_id(*n->ams_net_id))
      out.push_back(make_error("E_BAD_AMSNETID", rm.path_of(n->id) + "/amsNetId",
                               "'" + *n->ams_net_id + "' is not six dot-separated fields 0-255"));
    if (!(n->cycle_time_ms > 0))
      out.push_back(make_error("E_CYCLE_TIME", rm.path_of(n->id) + "/cycleTime", "cycle time must be positive"));
  }

  for (const FieldDevice* d : rm.devices()) {
    const PortDirection allowed = d->kind == DeviceKind::Sensor ? PortDirection::Out : PortDirection::In;
    for (std::size_t i = 0; i < d->ports.size(); ++i)
      if (d->ports[i].direction != allowed)
        out.push_back(make_error("E_DEVICE_PORT_DIR", rm.path_of(d->id) + "/ports/" + idx(i),
                                 std::string(d->kind == DeviceKind::Sensor ? "sensor" : "actuator") + " port '" +
                                     d->ports[i].name + "' must be an " + to_string(allowed) + "-port"));
  }

  auto diags = check_comm_addresses(rm);
  out.insert(out.end(), diags.begin(), diags.end());

  for (std::size_t i = 0; i < m.connections.size(); ++i) {
    const Connection& c = m.connections[i];
    if (c.kind != ConnectionKind::Control) continue;
    const SoftwareApplication* a = rm.find_sa(c.source.element);
    const SoftwareApplication* b = rm.find_sa(c.target.element);
    if (!a || !b) continue;
    const Node* na = rm.node_of(*a);
    const Node* nb = rm.node_of(*b);
    if (na && nb && na != nb)
      out.push_back(make_warning("W_CROSS_NODE_CONTROL", "/connections/" + idx(i),
                                 "control connection '" + c.id + "' crosses nodes; no exchange variable is derived"));
  }
  return out;
}

Diagnostics check_timing_budget(const ResolvedModel& rm) {
  Diagnostics out;
  for (const Node* n : rm.nodes()) {
    double total = 0;
    bool any = false;
    for (const SoftwareApplication* sa : rm.allocated_to(*n))
      if (sa->execution_time_ms) {
        total += *sa->execution_time_ms;
        any = true;
      }
    if (any && total > n->cycle_time_ms)
      out.push_back(make_warning("W_BUDGET", rm.path_of(n->id) + "/cycleTime",
                                 "SAs on node '" + n->name + "' need " + format_ms(total) + ", cycle time is " +
                                     format_ms(n->cycle_time_ms)));
  }

  const Model& m = rm.model();
  for (const auto& rel : m.relations) {
    if (rel.kind != RelationKind::Validity) continue;
    const Requirement* req = rm.find_requirement(rel.source);
    if (!req || req->kind != RequirementKind::NonFunctional) continue;
    std::vector<const SoftwareApplication*> sas;
    if (const auto* sa = rm.find_sa(rel.target)) sas.push_back(sa);
    if (const auto* af = rm.find_af(rel.target))
      for (const auto& child : af->children)
        if (const auto* sa = rm.find_sa(child)) sas.push_back(sa);
    for (const auto& prop : req->properties) {
      const auto bound = time_bound_ms(prop);
      if (!bound) continue;
      for (const SoftwareApplication* sa : sas)
        if (sa->execution_time_ms && *sa->execution_time_ms > *bound)
          out.push_back(make_warning("W_NFR_TIME", rm.path_of(sa->id) + "/executionTime",
                                     "SA '" + sa->name + "' needs " + format_ms(*sa->execution_time_ms) + ", '" +
                                         req->name + "' bounds " + prop.key + " to " + format_ms(*bound)));
    }
  }
  return out;
}

ValidationReport validate(const ResolvedModel& rm, const ValidateOptions& opts) {
  ValidationReport r;
  auto add = [&](Diagnostics d) { r.diagnostics.insert(r.diagnostics.end(), d.begin(), d.end()); };
  const auto& blocks = rm.model().blocks;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (const auto* pb = std::get_if<PersistentBlock>(&blocks[i]))
      add(validate_block_restrictions(rm, *pb));
    else
      add(validate_block_restrictions(std::get<TransientBlock>(blocks[i]), block_path(i)));
  }
  add(validate_connections(rm, opts));
  add(validate_system(rm));
  add(check_timing_budget(rm));
  r.passed = !has_errors(r.diagnostics);
  return r;
}

std::string report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed;
  j["errors"] = count_severity(report.diagnostics, Severity::Error);
  j["warnings"] = count_severity(report.diagnostics, Severity::Warning);
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : report.diagnostics) {
    nlohmann::ordered_json e;
    e["severity"] = to_string(d.severity);
    e["code"] = d.code;
    e["path"] = d.path;
    e["message"] = d.message;
    list.push_back(std::move(e));
  }
  j["diagnostics"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string report_to_text(const ValidationReport& report, bool color) {
  std::string out;
  for (const auto& d : report.diagnostics) {
    const bool err = d.severity == Severity::Error;
    std::string sev = to_string(d.severity);
    if (color) sev = (err ? "\x1b[31m" : "\x1b[33m") + sev + "\x1b[0m";
    out += sev + " " + d.code + " " + (d.path.empty() ? "/" : d.path) + ": " + d.message + "\n";
  }
  const auto errors = count_severity(report.diagnostics, Severity::Error);
  const auto warnings = count_severity(report.diagnostics, Severity::Warning);
  out += std::to_string(errors) + (errors == 1 ? " error, " : " errors, ") + std::to_string(warnings) +
         (warnings == 1 ? " warning" : " warnings") + "\n";
  return out;
}

}  // namespace maspc
