#include "maspc/st/simulation.hpp"

#include <charconv>

#include "maspc/identifier.hpp"
#include "maspc/st/parser.hpp"

namespace maspc::st {

Scenario parse_scenario(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("E_SCENARIO", std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error("E_SCENARIO", "scenario must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "cycles" && key != "commDelayCycles" && key != "stimulus")
      throw Error("E_SCENARIO", "unknown scenario key '" + key + "'");

  Scenario s;
  auto count = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw Error("E_SCENARIO", std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  };
  s.cycles = count("cycles", 0);
  s.comm_delay_cycles = count("commDelayCycles", 1);
  if (s.comm_delay_cycles < 1) throw Error("E_SCENARIO", "'commDelayCycles' must be at least 1");

  if (doc.contains("stimulus")) {
    const auto& stim = doc.at("stimulus");
    if (!stim.is_object()) throw Error("E_SCENARIO", "'stimulus' must be an object keyed by cycle");
    for (const auto& [key, values] : stim.items()) {
      std::uint64_t cycle = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), cycle);
      if (ec != std::errc() || ptr != key.data() + key.size())
        throw Error("E_SCENARIO", "stimulus key '" + key + "' is not a cycle number");
      if (!values.is_object()) throw Error("E_SCENARIO", "stimulus for cycle " + key + " must be an object");
      auto& slot = s.stimulus[cycle];
      for (const auto& [name, v] : values.items()) slot[name] = v;
    }
  }
  return s;
}

std::vector<NodeSources> node_sources(const GeneratedProject& project) {
  std::vector<NodeSources> out;
  for (const auto& n : project.nodes) {
    NodeSources ns{n.node, {}};
    for (const auto& a : n.artifacts) ns.sources.push_back(a.render());
    ns.sources.push_back(n.program.render());
    out.push_back(std::move(ns));
  }
  return out;
}

std::string trace_to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& e : trace) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [name, v] : e.values) values[name] = value_to_json(v);
    nlohmann::json line;
    line["cycle"] = e.cycle;
    line["values"] = std::move(values);
    out += line.dump() + "\n";
  }
  return out;
}

Simulation::Simulation(const GeneratedProject& project, Scenario scenario)
    : Simulation(node_sources(project), project.comm, std::move(scenario)) {}

Simulation::Simulation(const std::vector<NodeSources>& nodes, CommConfig comm, Scenario scenario)
    : comm_(std::move(comm)), scenario_(std::move(scenario)) {
  for (const auto& n : nodes) {
    auto program = Program::from_sources(n.sources, kProgramName);
    nodes_.push_back(SimNode{n.node, std::make_unique<NodeRuntime>(std::move(program), n.node)});
  }
  for (const auto& e : comm_.entries) {
    for (const auto* side : {&e.publisher, &e.subscriber}) {
      const SimNode* sn = node(side->node);
      if (!sn) throw Error("E_UNKNOWN_NAME", "comm entry '" + e.variable + "' names unknown node '" + side->node + "'");
      if (!sn->runtime->find(std::string(kProgramName) + "." + e.variable))
        throw Error("E_UNKNOWN_NAME", "node '" + side->node + "' has no exchange variable '" + e.variable + "'");
    }
  }
  for (const auto& [cycle, values] : scenario_.stimulus) {
    auto& bound = stimulus_[cycle];
    for (const auto& [name, json] : values) {
      auto var = find(name);
      if (!var) {
        // "node.x" is shorthand for "node.Main.x".
        const auto dot = name.find('.');
        if (dot != std::string::npos)
          var = find(name.substr(0, dot) + "." + std::string(kProgramName) + name.substr(dot));
      }
      if (!var) throw Error("E_UNKNOWN_NAME", "stimulus names unknown variable '" + name + "'");
      const VarDecl& decl = var->ref.instance->pou->vars[var->ref.slot];
      if (var->ref.instance->pou != &var->runtime->program().main() || decl.section != VarSection::Input)
        throw Error("E_BAD_VALUE", "stimulus target '" + name + "' is not an input of " + std::string(kProgramName));
      auto v = value_from_json(json, var->ref.type());
      if (!v)
        throw Error("E_BAD_VALUE", "stimulus value for '" + name + "' is not a valid " + to_string(var->ref.type()));
      bound.push_back(BoundStimulus{var->runtime, var->ref, *v});
    }
  }
}

std::vector<std::string> Simulation::node_ids() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) out.push_back(n.id);
  return out;
}

Simulation::SimNode* Simulation::node(std::string_view id) {
  for (auto& n : nodes_)
    if (iequals(n.id, id)) return &n;
  return nullptr;
}

const Simulation::SimNode* Simulation::node(std::string_view id) const {
  for (const auto& n : nodes_)
    if (iequals(n.id, id)) return &n;
  return nullptr;
}

NodeRuntime& Simulation::runtime(std::string_view id) {
  SimNode* n = node(id);
  if (!n) throw Error("E_UNKNOWN_NAME", "no node '" + std::string(id) + "'");
  return *n->runtime;
}

const NodeRuntime& Simulation::runtime(std::string_view id) const {
  const SimNode* n = node(id);
  if (!n) throw Error("E_UNKNOWN_NAME", "no node '" + std::string(id) + "'");
  return *n->runtime;
}

bool Simulation::mid_cycle() const { return active_ > 0 || prepared_; }

std::optional<SimPause> Simulation::pause_location() const {
  if (active_ >= nodes_.size() || !prepared_) return std::nullopt;
  auto loc = nodes_[active_].runtime->location();
  if (!loc) return std::nullopt;
  return SimPause{nodes_[active_].id, *loc};
}

void Simulation::prepare(std::size_t i) {
  NodeRuntime& rt = *nodes_[i].runtime;
  for (auto it = in_flight_.begin(); it != in_flight_.end();) {
    if (it->node == i && it->due <= cycle_) {
      rt.write(it->target, it->value);
      it = in_flight_.erase(it);
    } else {
      ++it;
    }
  }
  if (auto it = stimulus_.find(cycle_); it != stimulus_.end())
    for (const auto& s : it->second)
      if (s.runtime == &rt) rt.write(s.ref, s.value);
  rt.begin_scan();
  prepared_ = true;
}

void Simulation::finish_node(std::size_t i) {
  const std::string& id = nodes_[i].id;
  for (const auto& e : comm_.entries) {
    if (!iequals(e.publisher.node, id)) continue;
    const std::string var = std::string(kProgramName) + "." + e.variable;
    const VarRef src = *nodes_[i].runtime->find(var);
    SimNode* sub = node(e.subscriber.node);
    const std::size_t sub_index = static_cast<std::size_t>(sub - nodes_.data());
    in_flight_.push_back(Message{cycle_ + scenario_.comm_delay_cycles, sub_index, *sub->runtime->find(var),
                                 nodes_[i].runtime->read(src)});
  }
  ++active_;
  prepared_ = false;
}

void Simulation::finish_cycle() {
  ++cycle_;
  active_ = 0;
  prepared_ = false;
}

namespace {

template <typename F>
auto guarded(const std::string& node, std::uint64_t cycle, F&& f) {
  try {
    return f();
  } catch (const RuntimeError& e) {
    throw Error("E_RUNTIME", "node " + node + ", cycle " + std::to_string(cycle) + ": " + e.what());
  }
}

}  // namespace

Simulation::Advance Simulation::advance(bool honor_breakpoints) {
  bool resuming = prepared_;
  while (active_ < nodes_.size()) {
    NodeRuntime& rt = *nodes_[active_].runtime;
    if (!prepared_) {
      prepare(active_);
    } else if (resuming) {
      rt.resume_past_breakpoint();
    }
    resuming = false;
    const StepResult r = guarded(nodes_[active_].id, cycle_, [&] { return rt.run_to_end(honor_breakpoints); });
    if (r == StepResult::BreakpointHit) return Advance::Paused;
    finish_node(active_);
  }
  finish_cycle();
  return Advance::CycleComplete;
}

Simulation::Advance Simulation::step_statement() {
  for (;;) {
    if (active_ >= nodes_.size()) {
      finish_cycle();
      return Advance::CycleComplete;
    }
    NodeRuntime& rt = *nodes_[active_].runtime;
    if (!prepared_) prepare(active_);
    const StepResult r = guarded(nodes_[active_].id, cycle_, [&] { return rt.step(false); });
    if (r == StepResult::ScanComplete) {
      finish_node(active_);
      continue;
    }
    if (rt.finish_if_done()) {
      finish_node(active_);
      if (active_ >= nodes_.size()) {
        finish_cycle();
        return Advance::CycleComplete;
      }
      prepare(active_);
    }
    return Advance::Paused;
  }
}

std::optional<Simulation::Variable> Simulation::find(std::string_view qualified) const {
  const auto dot = qualified.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  const SimNode* n = node(qualified.substr(0, dot));
  if (!n) return std::nullopt;
  const std::string_view local = qualified.substr(dot + 1);
  if (auto ref = n->runtime->find(local)) return Variable{n->runtime.get(), *ref};

  // "node.Main.x" also names x of a direct instance of Main when exactly one
  // instance declares it, e.g. "CX5010.Main.Angle" for Main.VC_SA_inst.Angle.
  const std::string main_prefix = to_upper(std::string(kProgramName) + ".");
  const std::string upper = to_upper(local);
  if (upper.compare(0, main_prefix.size(), main_prefix) != 0) return std::nullopt;
  const std::string leaf = upper.substr(main_prefix.size());
  if (leaf.find('.') != std::string::npos) return std::nullopt;
  std::optional<VarRef> hit;
  for (const auto& [name, ref] : n->runtime->variables()) {
    const std::string u = to_upper(name);
    if (u.compare(0, main_prefix.size(), main_prefix) != 0) continue;
    const std::string rest = u.substr(main_prefix.size());
    const auto d = rest.find('.');
    if (d == std::string::npos || rest.find('.', d + 1) != std::string::npos || rest.substr(d + 1) != leaf) continue;
    if (hit) return std::nullopt;  // ambiguous
    hit = ref;
  }
  if (!hit) return std::nullopt;
  return Variable{n->runtime.get(), *hit};
}

std::vector<std::string> Simulation::variable_names() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    for (const auto& [name, ref] : n.runtime->variables()) out.push_back(n.id + "." + name);
  return out;
}

std::map<std::string, Value> Simulation::snapshot() const {
  std::map<std::string, Value> out;
  for (const auto& n : nodes_)
    for (const auto& [name, ref] : n.runtime->variables()) out.emplace(n.id + "." + name, n.runtime->read(ref));
  return out;
}

bool Simulation::set_breakpoint(std::string_view artifact, std::size_t statement_index) {
  bool any = false;
  for (auto& n : nodes_) any = n.runtime->set_breakpoint(artifact, statement_index) || any;
  return any;
}

bool Simulation::clear_breakpoint(std::string_view artifact, std::size_t statement_index) {
  bool any = false;
  for (auto& n : nodes_) any = n.runtime->clear_breakpoint(artifact, statement_index) || any;
  return any;
}

std::set<std::pair<std::string, std::size_t>> Simulation::breakpoints() const {
  std::set<std::pair<std::string, std::size_t>> out;
  for (const auto& n : nodes_) {
    auto b = n.runtime->breakpoints();
    out.insert(b.begin(), b.end());
  }
  return out;
}

Trace run_simulation(Simulation& sim, std::uint64_t cycles) {
  Trace trace;
  trace.reserve(cycles);
  for (std::uint64_t k = 0; k < cycles; ++k) {
    sim.advance(false);
    trace.push_back(TraceEntry{sim.cycle() - 1, sim.snapshot()});
  }
  return trace;
}

Trace run_simulation(const GeneratedProject& project, const Scenario& scenario) {
  Simulation sim(project, scenario);
  return run_simulation(sim, scenario.cycles);
}

}  // namespace maspc::st
