#include "maspc/codegen.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "maspc/identifier.hpp"
#include "maspc/st/parser.hpp"
#include "maspc/st/program.hpp"

namespace maspc {

const char* to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::FunctionBlock: return "FUNCTION_BLOCK";
    case ArtifactKind::Function: return "FUNCTION";
    case ArtifactKind::Program: return "PROGRAM";
  }
  return "?";
}

std::string StArtifact::render() const {
  std::string out;
  out += kGeneratedHeader;
  out += "\n";
  out += declaration_text;
  out += "\n";
  out += implementation_text;
  out += "END_";
  out += to_string(kind);
  out += "\n";
  return out;
}

namespace {

constexpr std::string_view kIndent = "    ";

void var_section(std::string& out, const char* keyword, const std::vector<std::string>& lines) {
  if (lines.empty()) return;
  out += keyword;
  out += "\n";
  for (const auto& l : lines) {
    out += kIndent;
    out += l;
    out += "\n";
  }
  out += "END_VAR\n";
}

std::string decl(const std::string& name, const std::string& type) { return name + " : " + type + ";"; }

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

st::Value literal_value(const Literal& lit, DataType type) {
  return std::visit(
      [&](auto v) -> st::Value {
        switch (type) {
          case DataType::Bool: return static_cast<bool>(v);
          case DataType::Int: return static_cast<std::int16_t>(v);
          case DataType::Dint: return static_cast<std::int32_t>(v);
          case DataType::Real: return static_cast<float>(v);
          case DataType::Lreal: return static_cast<double>(v);
        }
        return false;
      },
      lit);
}

const ConstraintParameter* out_param(const TransientBlock& tb) {
  const ConstraintParameter* out = nullptr;
  for (const auto& p : tb.params)
    if (p.direction == PortDirection::Out) {
      if (out) return nullptr;
      out = &p;
    }
  return out;
}

}  // namespace

StArtifact generate_function(const TransientBlock& tb) {
  const ConstraintParameter* out = out_param(tb);
  if (!out) throw Error("E_TB_OUT_COUNT", "transient block '" + tb.name + "' needs exactly one out parameter");

  StArtifact a;
  a.kind = ArtifactKind::Function;
  a.name = tb.name;
  a.declaration_text = "FUNCTION " + tb.name + " : " + to_string(out->type) + "\n";
  std::vector<std::string> inputs;
  for (const auto& p : tb.params)
    if (p.direction == PortDirection::In) inputs.push_back(decl(p.name, to_string(p.type)));
  var_section(a.declaration_text, "VAR_INPUT", inputs);

  for (const auto& line : tb.body) {
    std::string l = rtrim(st::rename_identifier(line, out->name, tb.name));
    if (l.find_first_not_of(" \t") == std::string::npos) continue;
    a.implementation_text += l + "\n";
  }
  if (a.implementation_text.empty())
    throw Error("E_BODY_PARSE", "transient block '" + tb.name + "' has an empty body");
  try {
    st::Program::load(st::parse_units(a.render()), "");
  } catch (const Error& e) {
    throw Error("E_BODY_PARSE", "body of '" + tb.name + "': " + e.code() + " " + e.what());
  }
  return a;
}

StArtifact generate_function_block(const ResolvedModel& model, const PersistentBlock& pb) {
  const ResolvedPersistentBlock& rb = model.resolved(pb);
  StArtifact a;
  a.kind = ArtifactKind::FunctionBlock;
  a.name = pb.name;
  a.declaration_text = "FUNCTION_BLOCK " + pb.name + "\n";

  std::vector<std::string> lines;
  for (const auto& p : pb.in_ports) lines.push_back(decl(p.name, to_string(p.type)));
  var_section(a.declaration_text, "VAR_INPUT", lines);
  lines.clear();
  for (const auto& p : pb.out_ports) lines.push_back(decl(p.name, to_string(p.type)));
  var_section(a.declaration_text, "VAR_OUTPUT", lines);
  lines.clear();
  for (const auto& v : pb.values) {
    std::string l = v.name + " : " + to_string(v.type);
    if (v.initial) l += " := " + st::format_st_literal(literal_value(*v.initial, v.type));
    lines.push_back(l + ";");
  }
  for (std::size_t i = 0; i < pb.parts.size(); ++i) lines.push_back(decl(pb.parts[i].name, rb.part_types[i]->name));
  var_section(a.declaration_text, "VAR", lines);

  auto expr = [&](const ResolvedEndpoint& e) -> std::string {
    switch (e.kind) {
      case EndpointKind::SelfInPort: return pb.in_ports[e.feature].name;
      case EndpointKind::SelfOutPort: return pb.out_ports[e.feature].name;
      case EndpointKind::SelfValue: return pb.values[e.feature].name;
      case EndpointKind::PartInPort:
        return pb.parts[e.member].name + "." + rb.part_types[e.member]->in_ports[e.feature].name;
      case EndpointKind::PartOutPort:
        return pb.parts[e.member].name + "." + rb.part_types[e.member]->out_ports[e.feature].name;
      case EndpointKind::ConstraintIn:
      case EndpointKind::ConstraintOut:
        return pb.constraints[e.member].name + "." + rb.constraint_types[e.member]->params[e.feature].name;
    }
    return {};
  };

  struct Item {
    std::int64_t order;
    int rank;
    std::size_t index;
    std::string line;
  };
  std::vector<Item> items;

  for (std::size_t i = 0; i < pb.parts.size(); ++i)
    if (pb.parts[i].order > 0) items.push_back({pb.parts[i].order, 0, i, pb.parts[i].name + "();"});

  for (std::size_t ci = 0; ci < pb.constraints.size(); ++ci) {
    const ConstraintProperty& cp = pb.constraints[ci];
    if (cp.order <= 0) continue;
    const TransientBlock& tb = *rb.constraint_types[ci];
    std::map<std::size_t, std::string> bound;
    std::string target;
    for (const auto& f : rb.flows) {
      if (f.target.kind == EndpointKind::ConstraintIn && f.target.member == ci)
        bound.emplace(f.target.feature, expr(f.source));
      if (f.source.kind == EndpointKind::ConstraintOut && f.source.member == ci && target.empty())
        target = expr(f.target);
    }
    std::string call = tb.name + "(";
    bool first = true;
    for (std::size_t p = 0; p < tb.params.size(); ++p) {
      if (tb.params[p].direction != PortDirection::In) continue;
      auto it = bound.find(p);
      if (it == bound.end())
        throw Error("E_UNBOUND_FC_PARAM", "parameter '" + tb.params[p].name + "' of constraint '" + cp.name +
                                              "' in block '" + pb.name + "' is not bound by a flow");
      if (!first) call += ", ";
      first = false;
      call += tb.params[p].name + " := " + it->second;
    }
    call += ")";
    items.push_back({cp.order, 1, ci, target.empty() ? call + ";" : target + " := " + call + ";"});
  }

  for (const auto& f : rb.flows) {
    if (f.attached_constraint() || f.flow->order <= 0) continue;
    items.push_back({f.flow->order, 2, f.index, expr(f.target) + " := " + expr(f.source) + ";"});
  }

  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    return std::tie(x.order, x.rank, x.index) < std::tie(y.order, y.rank, y.index);
  });
  for (const auto& it : items) a.implementation_text += it.line + "\n";
  return a;
}

namespace {

const Port* sa_port(const SoftwareApplication& sa, std::string_view name) {
  for (const auto& p : sa.ports)
    if (iequals(p.name, name)) return &p;
  return nullptr;
}

const Port* device_port(const FieldDevice& d, std::string_view name) {
  for (const auto& p : d.ports)
    if (iequals(p.name, name)) return &p;
  return nullptr;
}

std::string instance_name(const SoftwareApplication& sa) { return sa.id + "_inst"; }

}  // namespace

StArtifact generate_node_program(const ResolvedModel& model, const Node& node, const CommConfig& comm) {
  const auto sas = model.allocated_to(node);
  auto on_node = [&](const SoftwareApplication* sa) { return std::find(sas.begin(), sas.end(), sa) != sas.end(); };

  std::vector<std::string> inputs, outputs, locals, reads, writes;
  std::set<std::string> declared;
  auto declare = [&](std::vector<std::string>& section, const std::string& name, DataType t) {
    if (declared.insert(to_upper(name)).second) section.push_back(decl(name, to_string(t)));
  };

  for (const SoftwareApplication* sa : sas)
    locals.push_back(decl(instance_name(*sa), model.find_persistent(sa->behavior)->name));

  for (const auto& e : comm.entries) {
    if (e.subscriber.node == node.id) {
      declare(locals, e.variable, e.type);
      const SoftwareApplication* sa = model.find_sa(e.subscriber.sa);
      reads.push_back(instance_name(*sa) + "." + sa_port(*sa, e.subscriber.port)->name + " := " + e.variable + ";");
    }
    if (e.publisher.node == node.id) {
      declare(locals, e.variable, e.type);
      const SoftwareApplication* sa = model.find_sa(e.publisher.sa);
      writes.push_back(e.variable + " := " + instance_name(*sa) + "." + sa_port(*sa, e.publisher.port)->name + ";");
    }
  }

  // Same-node SA links, grouped by target SA; device links become Main I/O.
  std::map<const SoftwareApplication*, std::vector<std::string>> local_links;
  for (const auto& c : model.model().connections) {
    if (c.kind != ConnectionKind::Data) continue;
    const SoftwareApplication* src_sa = model.find_sa(c.source.element);
    const SoftwareApplication* dst_sa = model.find_sa(c.target.element);
    const FieldDevice* src_dev = model.find_device(c.source.element);
    const FieldDevice* dst_dev = model.find_device(c.target.element);
    if (src_sa && dst_sa && on_node(src_sa) && on_node(dst_sa)) {
      local_links[dst_sa].push_back(instance_name(*dst_sa) + "." + sa_port(*dst_sa, c.target.port)->name + " := " +
                                    instance_name(*src_sa) + "." + sa_port(*src_sa, c.source.port)->name + ";");
    } else if (src_dev && dst_sa && on_node(dst_sa)) {
      const Port* p = device_port(*src_dev, c.source.port);
      const std::string var = sanitize_identifier(src_dev->id + "_" + p->name);
      declare(inputs, var, p->type);
      reads.push_back(instance_name(*dst_sa) + "." + sa_port(*dst_sa, c.target.port)->name + " := " + var + ";");
    } else if (src_sa && dst_dev && on_node(src_sa)) {
      const Port* p = device_port(*dst_dev, c.target.port);
      const std::string var = sanitize_identifier(dst_dev->id + "_" + p->name);
      declare(outputs, var, p->type);
      writes.push_back(var + " := " + instance_name(*src_sa) + "." + sa_port(*src_sa, c.source.port)->name + ";");
    }
  }

  StArtifact a;
  a.kind = ArtifactKind::Program;
  a.name = std::string(kProgramName);
  a.declaration_text = "PROGRAM " + a.name + "\n";
  var_section(a.declaration_text, "VAR_INPUT", inputs);
  var_section(a.declaration_text, "VAR_OUTPUT", outputs);
  var_section(a.declaration_text, "VAR", locals);

  for (const auto& l : reads) a.implementation_text += l + "\n";
  for (const SoftwareApplication* sa : sas) {
    for (const auto& l : local_links[sa]) a.implementation_text += l + "\n";
    a.implementation_text += instance_name(*sa) + "();\n";
  }
  for (const auto& l : writes) a.implementation_text += l + "\n";
  return a;
}

std::map<std::string, std::string> GeneratedProject::files() const {
  std::map<std::string, std::string> out;
  for (const auto& n : nodes) {
    for (const auto& a : n.artifacts) out[n.node + "/" + a.name + ".st"] = a.render();
    out[n.node + "/" + n.program.name + ".st"] = n.program.render();
  }
  out["comm.json"] = emit_comm_config(comm);
  return out;
}

GeneratedProject generate_project(const ResolvedModel& model, const ValidateOptions& options) {
  ValidationReport report = validate(model, options);
  if (!report.passed) throw GenerationError(std::move(report));

  GeneratedProject project;
  project.comm = derive_pubsub(model);

  const auto& blocks = model.model().blocks;
  std::map<const void*, StArtifact> cache;
  std::map<std::string, int> uses;

  for (const Node* node : model.nodes()) {
    const auto sas = model.allocated_to(*node);
    if (sas.empty()) continue;

    std::set<const void*> reachable;
    std::function<void(const PersistentBlock&)> visit = [&](const PersistentBlock& pb) {
      if (!reachable.insert(&pb).second) return;
      const auto& rb = model.resolved(pb);
      for (const auto* t : rb.part_types) visit(*t);
      for (const auto* t : rb.constraint_types) reachable.insert(t);
    };
    for (const auto* sa : sas) visit(*model.find_persistent(sa->behavior));

    NodeArtifacts na;
    na.node = node->id;
    std::vector<StArtifact> fcs, fbs;
    for (const auto& b : blocks) {
      const void* key = std::visit([](const auto& x) -> const void* { return &x; }, b);
      if (!reachable.count(key)) continue;
      auto it = cache.find(key);
      if (it == cache.end()) {
        StArtifact art = std::holds_alternative<TransientBlock>(b)
                             ? generate_function(std::get<TransientBlock>(b))
                             : generate_function_block(model, std::get<PersistentBlock>(b));
        it = cache.emplace(key, std::move(art)).first;
      }
      (it->second.kind == ArtifactKind::Function ? fcs : fbs).push_back(it->second);
      ++uses[it->second.name];
    }
    na.artifacts = std::move(fcs);
    for (auto& fb : fbs) na.artifacts.push_back(std::move(fb));
    na.program = generate_node_program(model, *node, project.comm);
    project.nodes.push_back(std::move(na));
  }
  for (const auto& [name, n] : uses)
    if (n > 1) project.shared.push_back(name);
  return project;
}

void write_project(const GeneratedProject& project, const std::filesystem::path& out) {
  const auto files = project.files();
  for (const auto& [rel, content] : files) {
    const auto path = out / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("E_IO", "cannot write " + path.string());
    f << content;
    if (!f) throw Error("E_IO", "cannot write " + path.string());
  }
}

}  // namespace maspc
