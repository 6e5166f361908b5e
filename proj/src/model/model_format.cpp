#include "maspc/model_format.hpp"

#include <set>

#include "json.hpp"
#include "maspc/identifier.hpp"

namespace maspc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class Reader {
 public:
  Reader(Diagnostics& diags, const ParseOptions& opts) : diags_(diags), opts_(opts) {}

  void error(std::string code, const std::string& path, std::string message) {
    diags_.push_back(make_error(std::move(code), path, std::move(message)));
  }

  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      error("E_SYNTAX", path, "expected an object");
      return false;
    }
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      const std::string kpath = path + "/" + key;
      if (opts_.strict)
        error("E_UNKNOWN_KEY", kpath, "unknown key '" + key + "'");
      else
        diags_.push_back(make_warning("W_UNKNOWN_KEY", kpath, "unknown key '" + key + "' ignored"));
    }
    return true;
  }

  const json* field(const json& obj, const std::string& path, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error("E_SYNTAX", path + "/" + key, std::string("missing required key '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::string str(const json& obj, const std::string& path, const char* key, bool required = true) {
    const json* v = field(obj, path, key, required);
    if (!v) return {};
    if (!v->is_string()) {
      error("E_SYNTAX", path + "/" + key, "expected a string");
      return {};
    }
    return v->get<std::string>();
  }

  std::optional<std::string> opt_str(const json& obj, const std::string& path, const char* key) {
    const json* v = field(obj, path, key, false);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      error("E_SYNTAX", path + "/" + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<double> opt_number(const json& obj, const std::string& path, const char* key) {
    const json* v = field(obj, path, key, false);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      error("E_SYNTAX", path + "/" + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  double number(const json& obj, const std::string& path, const char* key) {
    if (!field(obj, path, key, true)) return 0.0;
    return opt_number(obj, path, key).value_or(0.0);
  }

  std::int64_t integer(const json& obj, const std::string& path, const char* key) {
    const json* v = field(obj, path, key, true);
    if (!v) return 0;
    if (!v->is_number_integer()) {
      error("E_SYNTAX", path + "/" + key, "expected an integer");
      return 0;
    }
    return v->get<std::int64_t>();
  }

  /// Iterates an optional array member.
  template <typename Fn>
  void array(const json& obj, const std::string& path, const char* key, bool required, Fn&& fn) {
    const json* v = field(obj, path, key, required);
    if (!v) return;
    const std::string apath = path + "/" + key;
    if (!v->is_array()) {
      error("E_SYNTAX", apath, "expected an array");
      return;
    }
    for (std::size_t i = 0; i < v->size(); ++i) fn((*v)[i], apath + "/" + std::to_string(i));
  }

  std::vector<std::string> strings(const json& obj, const std::string& path, const char* key) {
    std::vector<std::string> out;
    array(obj, path, key, false, [&](const json& e, const std::string& p) {
      if (!e.is_string())
        error("E_SYNTAX", p, "expected a string");
      else
        out.push_back(e.get<std::string>());
    });
    return out;
  }

  void ident(const std::string& name, const std::string& path) {
    if (!is_iec_identifier(name))
      error("E_IDENTIFIER", path, "'" + name + "' is not a valid IEC 61131-3 identifier");
  }

  /// Case-insensitive uniqueness within one scope.
  void unique(std::set<std::string>& scope, const std::string& name, const std::string& path) {
    if (name.empty()) return;
    if (!scope.insert(to_upper(name)).second)
      error("E_IDENTIFIER", path, "name '" + name + "' is not unique in its scope");
  }

  DataType data_type(const json& obj, const std::string& path, const char* key = "type") {
    const std::string s = str(obj, path, key);
    if (s.empty()) return DataType::Bool;
    auto t = parse_data_type(s);
    if (!t) {
      error("E_SYNTAX", path + "/" + key, "unknown data type '" + s + "'");
      return DataType::Bool;
    }
    return *t;
  }

  PortDirection direction(const json& obj, const std::string& path) {
    const std::string s = str(obj, path, "direction");
    if (s == "in") return PortDirection::In;
    if (s == "out") return PortDirection::Out;
    if (!s.empty()) error("E_SYNTAX", path + "/direction", "direction must be 'in' or 'out'");
    return PortDirection::In;
  }

  std::vector<Port> ports(const json& obj, const std::string& path) {
    std::vector<Port> out;
    std::set<std::string> scope;
    array(obj, path, "ports", false, [&](const json& e, const std::string& p) {
      if (!object(e, p, {"name", "direction", "type"})) return;
      Port port;
      port.name = str(e, p, "name");
      ident(port.name, p + "/name");
      unique(scope, port.name, p + "/name");
      port.direction = direction(e, p);
      port.type = data_type(e, p);
      out.push_back(std::move(port));
    });
    return out;
  }

  Diagnostics& diags_;
  const ParseOptions& opts_;
};

std::optional<Literal> literal_from(const json& v) {
  if (v.is_boolean()) return Literal{v.get<bool>()};
  if (v.is_number_integer()) return Literal{v.get<std::int64_t>()};
  if (v.is_number_float()) return Literal{v.get<double>()};
  return std::nullopt;
}

std::optional<Scalar> scalar_from(const json& v) {
  if (v.is_string()) return Scalar{v.get<std::string>()};
  if (auto l = literal_from(v)) return std::visit([](auto x) { return Scalar{x}; }, *l);
  return std::nullopt;
}

void parse_requirements(Reader& r, const json& doc, Model& m, std::set<std::string>& ids) {
  r.array(doc, "", "requirements", true, [&](const json& e, const std::string& p) {
    if (!r.object(e, p, {"id", "name", "text", "kind", "properties"})) return;
    Requirement req;
    req.id = r.str(e, p, "id");
    r.ident(req.id, p + "/id");
    r.unique(ids, req.id, p + "/id");
    req.name = r.str(e, p, "name");
    if (req.name.empty() && e.contains("name")) r.error("E_SYNTAX", p + "/name", "name must not be empty");
    req.text = r.str(e, p, "text", false);
    const std::string kind = r.str(e, p, "kind");
    if (kind == "functional")
      req.kind = RequirementKind::Functional;
    else if (kind == "nonFunctional")
      req.kind = RequirementKind::NonFunctional;
    else if (!kind.empty())
      r.error("E_SYNTAX", p + "/kind", "kind must be 'functional' or 'nonFunctional'");
    r.array(e, p, "properties", false, [&](const json& pe, const std::string& pp) {
      if (!r.object(pe, pp, {"key", "value", "unit"})) return;
      NfrProperty prop;
      prop.key = r.str(pe, pp, "key");
      if (const json* v = r.field(pe, pp, "value", true)) {
        if (auto s = scalar_from(*v))
          prop.value = *s;
        else
          r.error("E_SYNTAX", pp + "/value", "value must be a scalar");
      }
      prop.unit = r.str(pe, pp, "unit", false);
      req.properties.push_back(std::move(prop));
    });
    if (req.kind == RequirementKind::Functional && !req.properties.empty())
      r.error("E_SYNTAX", p + "/properties", "functional requirements carry no properties");
    m.requirements.push_back(std::move(req));
  });
}

void parse_relations(Reader& r, const json& doc, Model& m) {
  r.array(doc, "", "relations", true, [&](const json& e, const std::string& p) {
    if (!r.object(e, p, {"kind", "source", "target"})) return;
    RequirementRelation rel;
    const std::string kind = r.str(e, p, "kind");
    if (kind == "Refine")
      rel.kind = RelationKind::Refine;
    else if (kind == "Validity")
      rel.kind = RelationKind::Validity;
    else if (!kind.empty())
      r.error("E_SYNTAX", p + "/kind", "kind must be 'Refine' or 'Validity'");
    rel.source = r.str(e, p, "source");
    rel.target = r.str(e, p, "target");
    m.relations.push_back(std::move(rel));
  });
}

void parse_functions(Reader& r, const json& doc, Model& m, std::set<std::string>& ids) {
  r.array(doc, "", "functions", true, [&](const json& e, const std::string& p) {
    if (!e.is_object()) {
      r.error("E_SYNTAX", p, "expected an object");
      return;
    }
    const std::string kind = r.str(e, p, "kind");
    if (kind == "AF") {
      r.object(e, p, {"kind", "id", "name", "connections", "children"});
      AutomationFunction af;
      af.id = r.str(e, p, "id");
      r.ident(af.id, p + "/id");
      r.unique(ids, af.id, p + "/id");
      af.name = r.str(e, p, "name");
      af.connections = r.strings(e, p, "connections");
      af.children = r.strings(e, p, "children");
      m.functions.emplace_back(std::move(af));
    } else if (kind == "SA") {
      r.object(e, p, {"kind", "id", "name", "ports", "behavior", "executionTime"});
      SoftwareApplication sa;
      sa.id = r.str(e, p, "id");
      r.ident(sa.id, p + "/id");
      r.unique(ids, sa.id, p + "/id");
      sa.name = r.str(e, p, "name");
      sa.ports = r.ports(e, p);
      sa.behavior = r.str(e, p, "behavior");
      sa.execution_time_ms = r.opt_number(e, p, "executionTime");
      m.functions.emplace_back(std::move(sa));
    } else if (!kind.empty()) {
      r.error("E_SYNTAX", p + "/kind", "function kind must be 'AF' or 'SA'");
    }
  });
}

void parse_hardware(Reader& r, const json& doc, Model& m, std::set<std::string>& ids) {
  r.array(doc, "", "hardware", true, [&](const json& e, const std::string& p) {
    if (!e.is_object()) {
      r.error("E_SYNTAX", p, "expected an object");
      return;
    }
    const std::string kind = r.str(e, p, "kind");
    if (kind == "node") {
      r.object(e, p, {"kind", "id", "name", "vendor", "busType", "busAddress", "amsNetId", "cycleTime",
                      "memory", "ports"});
      Node n;
      n.id = r.str(e, p, "id");
      r.ident(n.id, p + "/id");
      r.unique(ids, n.id, p + "/id");
      n.name = r.str(e, p, "name");
      n.vendor_stereotype = r.opt_str(e, p, "vendor");
      n.bus_type = r.str(e, p, "busType", false);
      n.bus_address = r.str(e, p, "busAddress", false);
      n.ams_net_id = r.opt_str(e, p, "amsNetId");
      n.cycle_time_ms = r.number(e, p, "cycleTime");
      n.memory_kb = r.opt_number(e, p, "memory").value_or(0.0);
      n.ports = r.ports(e, p);
      m.hardware.emplace_back(std::move(n));
    } else if (kind == "sensor" || kind == "actuator") {
      r.object(e, p, {"kind", "id", "name", "deviceType", "busType", "busAddress", "ports"});
      FieldDevice d;
      d.kind = kind == "sensor" ? DeviceKind::Sensor : DeviceKind::Actuator;
      d.id = r.str(e, p, "id");
      r.ident(d.id, p + "/id");
      r.unique(ids, d.id, p + "/id");
      d.name = r.str(e, p, "name");
      d.device_type = r.str(e, p, "deviceType", false);
      d.bus_type = r.str(e, p, "busType", false);
      d.bus_address = r.str(e, p, "busAddress", false);
      d.ports = r.ports(e, p);
      m.hardware.emplace_back(std::move(d));
    } else if (!kind.empty()) {
      r.error("E_SYNTAX", p + "/kind", "hardware kind must be 'node', 'sensor' or 'actuator'");
    }
  });
}

void parse_allocations(Reader& r, const json& doc, Model& m) {
  r.array(doc, "", "allocations", true, [&](const json& e, const std::string& p) {
    if (!r.object(e, p, {"sa", "node"})) return;
    m.allocations.push_back({r.str(e, p, "sa"), r.str(e, p, "node")});
  });
}

void parse_connections(Reader& r, const json& doc, Model& m, std::set<std::string>& ids) {
  r.array(doc, "", "connections", true, [&](const json& e, const std::string& p) {
    if (!r.object(e, p, {"id", "kind", "source", "target"})) return;
    Connection c;
    c.id = r.str(e, p, "id");
    r.ident(c.id, p + "/id");
    r.unique(ids, c.id, p + "/id");
    const std::string kind = r.str(e, p, "kind");
    if (kind == "data")
      c.kind = ConnectionKind::Data;
    else if (kind == "control")
      c.kind = ConnectionKind::Control;
    else if (kind == "logical")
      c.kind = ConnectionKind::Logical;
    else if (!kind.empty())
      r.error("E_SYNTAX", p + "/kind", "connection kind must be 'data', 'control' or 'logical'");
    auto end = [&](const char* key) {
      ConnectionEnd ce;
      const json* v = r.field(e, p, key, true);
      const std::string ep = p + "/" + key;
      if (!v || !r.object(*v, ep, {"element", "port"})) return ce;
      ce.element = r.str(*v, ep, "element");
      ce.port = r.str(*v, ep, "port", false);
      return ce;
    };
    c.source = end("source");
    c.target = end("target");
    m.connections.push_back(std::move(c));
  });
}

void parse_blocks(Reader& r, const json& doc, Model& m, std::set<std::string>& ids) {
  std::set<std::string> block_names;
  r.array(doc, "", "blocks", true, [&](const json& e, const std::string& p) {
    if (!e.is_object()) {
      r.error("E_SYNTAX", p, "expected an object");
      return;
    }
    const std::string kind = r.str(e, p, "kind");
    if (kind == "persistent") {
      r.object(e, p, {"kind", "id", "name", "inPorts", "outPorts", "values", "parts", "constraints",
                      "flows"});
      PersistentBlock pb;
      pb.id = r.str(e, p, "id");
      r.ident(pb.id, p + "/id");
      r.unique(ids, pb.id, p + "/id");
      pb.name = r.str(e, p, "name");
      r.ident(pb.name, p + "/name");
      r.unique(block_names, pb.name, p + "/name");

      std::set<std::string> members{to_upper(kSelfInstance)};
      auto member = [&](const std::string& name, const std::string& np) {
        r.ident(name, np);
        r.unique(members, name, np);
      };
      auto block_ports = [&](const char* key, std::vector<BlockPort>& out) {
        r.array(e, p, key, false, [&](const json& pe, const std::string& pp) {
          if (!r.object(pe, pp, {"name", "type"})) return;
          BlockPort bp{r.str(pe, pp, "name"), r.data_type(pe, pp)};
          member(bp.name, pp + "/name");
          out.push_back(std::move(bp));
        });
      };
      block_ports("inPorts", pb.in_ports);
      block_ports("outPorts", pb.out_ports);
      r.array(e, p, "values", false, [&](const json& ve, const std::string& vp) {
        if (!r.object(ve, vp, {"name", "type", "initial"})) return;
        ValueProperty v;
        v.name = r.str(ve, vp, "name");
        member(v.name, vp + "/name");
        v.type = r.data_type(ve, vp);
        if (const json* init = r.field(ve, vp, "initial", false)) {
          v.initial = literal_from(*init);
          if (!v.initial)
            r.error("E_SYNTAX", vp + "/initial", "initial value must be a boolean or number");
          else if (!literal_matches(*v.initial, v.type))
            r.error("E_SYNTAX", vp + "/initial",
                    std::string("initial value does not match type ") + to_string(v.type));
        }
        pb.values.push_back(std::move(v));
      });
      r.array(e, p, "parts", false, [&](const json& pe, const std::string& pp) {
        if (!r.object(pe, pp, {"name", "type", "orderNumber"})) return;
        PartProperty part{r.str(pe, pp, "name"), r.str(pe, pp, "type"), r.integer(pe, pp, "orderNumber")};
        member(part.name, pp + "/name");
        pb.parts.push_back(std::move(part));
      });
      r.array(e, p, "constraints", false, [&](const json& ce, const std::string& cp) {
        if (!r.object(ce, cp, {"name", "type", "orderNumber"})) return;
        ConstraintProperty c{r.str(ce, cp, "name"), r.str(ce, cp, "type"),
                             r.integer(ce, cp, "orderNumber")};
        member(c.name, cp + "/name");
        pb.constraints.push_back(std::move(c));
      });
      r.array(e, p, "flows", false, [&](const json& fe, const std::string& fp) {
        if (!r.object(fe, fp, {"source", "target", "orderNumber"})) return;
        OrderedFlow f;
        auto end = [&](const char* key) {
          FlowEnd fe2;
          const json* v = r.field(fe, fp, key, true);
          const std::string ep = fp + "/" + key;
          if (!v || !r.object(*v, ep, {"instance", "feature"})) return fe2;
          fe2.instance = r.str(*v, ep, "instance");
          fe2.feature = r.str(*v, ep, "feature");
          if (!iequals(fe2.instance, kSelfInstance)) r.ident(fe2.instance, ep + "/instance");
          r.ident(fe2.feature, ep + "/feature");
          return fe2;
        };
        f.source = end("source");
        f.target = end("target");
        f.order = r.integer(fe, fp, "orderNumber");
        pb.flows.push_back(std::move(f));
      });
      m.blocks.emplace_back(std::move(pb));
    } else if (kind == "transient") {
      r.object(e, p, {"kind", "id", "name", "params", "body"});
      TransientBlock tb;
      tb.id = r.str(e, p, "id");
      r.ident(tb.id, p + "/id");
      r.unique(ids, tb.id, p + "/id");
      tb.name = r.str(e, p, "name");
      r.ident(tb.name, p + "/name");
      r.unique(block_names, tb.name, p + "/name");
      std::set<std::string> params;
      r.array(e, p, "params", false, [&](const json& pe, const std::string& pp) {
        if (!r.object(pe, pp, {"name", "direction", "type"})) return;
        ConstraintParameter cp{r.str(pe, pp, "name"), r.direction(pe, pp), r.data_type(pe, pp)};
        r.ident(cp.name, pp + "/name");
        r.unique(params, cp.name, pp + "/name");
        tb.params.push_back(std::move(cp));
      });
      tb.body = r.strings(e, p, "body");
      m.blocks.emplace_back(std::move(tb));
    } else if (!kind.empty()) {
      r.error("E_SYNTAX", p + "/kind", "block kind must be 'persistent' or 'transient'");
    }
  });
}

bool version_supported(const std::string& v) {
  // Same major version as kFormatVersion, "MAJOR.MINOR.PATCH" digits only.
  int major = 0, minor = 0, patch = 0;
  char tail = 0;
  if (std::sscanf(v.c_str(), "%d.%d.%d%c", &major, &minor, &patch, &tail) != 3) return false;
  return major == 1 && minor >= 0 && patch >= 0;
}

ordered_json ports_json(const std::vector<Port>& ports) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : ports)
    arr.push_back({{"name", p.name}, {"direction", to_string(p.direction)}, {"type", to_string(p.type)}});
  return arr;
}

ordered_json scalar_json(const Scalar& s) {
  return std::visit([](const auto& v) { return ordered_json(v); }, s);
}

ordered_json literal_json(const Literal& l) {
  return std::visit([](const auto& v) { return ordered_json(v); }, l);
}

}  // namespace

ParseResult parse_model(std::string_view text, const ParseOptions& options) {
  ParseResult result;
  Diagnostics& diags = result.diagnostics;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    diags.push_back(make_error("E_SYNTAX", "", e.what()));
    return result;
  }

  Reader r(diags, options);
  if (!r.object(doc, "", {"formatVersion", "requirements", "relations", "functions", "hardware",
                          "allocations", "connections", "blocks"}))
    return result;

  Model m;
  m.format_version = r.str(doc, "", "formatVersion");
  if (doc.contains("formatVersion") && doc["formatVersion"].is_string() &&
      !version_supported(m.format_version)) {
    diags.push_back(make_error("E_VERSION", "/formatVersion",
                               "format version '" + m.format_version + "' not supported (supported: " +
                                   std::string(kFormatVersion) + ")"));
    return result;
  }

  std::set<std::string> ids;
  parse_requirements(r, doc, m, ids);
  parse_relations(r, doc, m);
  parse_functions(r, doc, m, ids);
  parse_hardware(r, doc, m, ids);
  parse_allocations(r, doc, m);
  parse_connections(r, doc, m, ids);
  parse_blocks(r, doc, m, ids);

  if (!has_errors(diags)) result.model = std::move(m);
  return result;
}

std::string serialize_model(const Model& model) {
  ordered_json doc;
  doc["formatVersion"] = model.format_version;

  ordered_json reqs = ordered_json::array();
  for (const auto& r : model.requirements) {
    ordered_json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["text"] = r.text;
    j["kind"] = r.kind == RequirementKind::Functional ? "functional" : "nonFunctional";
    ordered_json props = ordered_json::array();
    for (const auto& p : r.properties)
      props.push_back({{"key", p.key}, {"value", scalar_json(p.value)}, {"unit", p.unit}});
    j["properties"] = std::move(props);
    reqs.push_back(std::move(j));
  }
  doc["requirements"] = std::move(reqs);

  ordered_json rels = ordered_json::array();
  for (const auto& r : model.relations)
    rels.push_back({{"kind", r.kind == RelationKind::Refine ? "Refine" : "Validity"},
                    {"source", r.source},
                    {"target", r.target}});
  doc["relations"] = std::move(rels);

  ordered_json fns = ordered_json::array();
  for (const auto& f : model.functions) {
    ordered_json j;
    if (const auto* af = std::get_if<AutomationFunction>(&f)) {
      j["kind"] = "AF";
      j["id"] = af->id;
      j["name"] = af->name;
      j["connections"] = af->connections;
      j["children"] = af->children;
    } else {
      const auto& sa = std::get<SoftwareApplication>(f);
      j["kind"] = "SA";
      j["id"] = sa.id;
      j["name"] = sa.name;
      j["ports"] = ports_json(sa.ports);
      j["behavior"] = sa.behavior;
      if (sa.execution_time_ms) j["executionTime"] = *sa.execution_time_ms;
    }
    fns.push_back(std::move(j));
  }
  doc["functions"] = std::move(fns);

  ordered_json hw = ordered_json::array();
  for (const auto& h : model.hardware) {
    ordered_json j;
    if (const auto* n = std::get_if<Node>(&h)) {
      j["kind"] = "node";
      j["id"] = n->id;
      j["name"] = n->name;
      if (n->vendor_stereotype) j["vendor"] = *n->vendor_stereotype;
      j["busType"] = n->bus_type;
      j["busAddress"] = n->bus_address;
      if (n->ams_net_id) j["amsNetId"] = *n->ams_net_id;
      j["cycleTime"] = n->cycle_time_ms;
      j["memory"] = n->memory_kb;
      j["ports"] = ports_json(n->ports);
    } else {
      const auto& d = std::get<FieldDevice>(h);
      j["kind"] = d.kind == DeviceKind::Sensor ? "sensor" : "actuator";
      j["id"] = d.id;
      j["name"] = d.name;
      j["deviceType"] = d.device_type;
      j["busType"] = d.bus_type;
      j["busAddress"] = d.bus_address;
      j["ports"] = ports_json(d.ports);
    }
    hw.push_back(std::move(j));
  }
  doc["hardware"] = std::move(hw);

  ordered_json allocs = ordered_json::array();
  for (const auto& a : model.allocations) allocs.push_back({{"sa", a.sa}, {"node", a.node}});
  doc["allocations"] = std::move(allocs);

  ordered_json conns = ordered_json::array();
  for (const auto& c : model.connections) {
    auto end = [](const ConnectionEnd& e) {
      ordered_json j;
      j["element"] = e.element;
      if (!e.port.empty()) j["port"] = e.port;
      return j;
    };
    ordered_json j;
    j["id"] = c.id;
    j["kind"] = to_string(c.kind);
    j["source"] = end(c.source);
    j["target"] = end(c.target);
    conns.push_back(std::move(j));
  }
  doc["connections"] = std::move(conns);

  ordered_json blocks = ordered_json::array();
  for (const auto& b : model.blocks) {
    ordered_json j;
    if (const auto* pb = std::get_if<PersistentBlock>(&b)) {
      j["kind"] = "persistent";
      j["id"] = pb->id;
      j["name"] = pb->name;
      auto bports = [](const std::vector<BlockPort>& ps) {
        ordered_json arr = ordered_json::array();
        for (const auto& p : ps) arr.push_back({{"name", p.name}, {"type", to_string(p.type)}});
        return arr;
      };
      j["inPorts"] = bports(pb->in_ports);
      j["outPorts"] = bports(pb->out_ports);
      ordered_json vals = ordered_json::array();
      for (const auto& v : pb->values) {
        ordered_json vj;
        vj["name"] = v.name;
        vj["type"] = to_string(v.type);
        if (v.initial) vj["initial"] = literal_json(*v.initial);
        vals.push_back(std::move(vj));
      }
      j["values"] = std::move(vals);
      ordered_json parts = ordered_json::array();
      for (const auto& p : pb->parts)
        parts.push_back({{"name", p.name}, {"type", p.type}, {"orderNumber", p.order}});
      j["parts"] = std::move(parts);
      ordered_json cons = ordered_json::array();
      for (const auto& c : pb->constraints)
        cons.push_back({{"name", c.name}, {"type", c.type}, {"orderNumber", c.order}});
      j["constraints"] = std::move(cons);
      ordered_json flows = ordered_json::array();
      for (const auto& f : pb->flows) {
        ordered_json fj;
        fj["source"] = {{"instance", f.source.instance}, {"feature", f.source.feature}};
        fj["target"] = {{"instance", f.target.instance}, {"feature", f.target.feature}};
        fj["orderNumber"] = f.order;
        flows.push_back(std::move(fj));
      }
      j["flows"] = std::move(flows);
    } else {
      const auto& tb = std::get<TransientBlock>(b);
      j["kind"] = "transient";
      j["id"] = tb.id;
      j["name"] = tb.name;
      ordered_json params = ordered_json::array();
      for (const auto& p : tb.params)
        params.push_back({{"name", p.name}, {"direction", to_string(p.direction)}, {"type", to_string(p.type)}});
      j["params"] = std::move(params);
      j["body"] = tb.body;
    }
    blocks.push_back(std::move(j));
  }
  doc["blocks"] = std::move(blocks);

  return doc.dump(2) + "\n";
}

}  // namespace maspc
