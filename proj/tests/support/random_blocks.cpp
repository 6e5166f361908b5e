#include "random_blocks.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace maspc::testing {

namespace {

ConstraintParameter in(const char* name, DataType t) { return {name, PortDirection::In, t}; }
ConstraintParameter out(const char* name, DataType t) { return {name, PortDirection::Out, t}; }

CatalogEntry fc(const char* name, std::vector<ConstraintParameter> params, std::vector<std::string> body,
                std::function<Value(const std::vector<Value>&)> eval) {
  return {TransientBlock{name, name, std::move(params), std::move(body)}, std::move(eval)};
}

template <typename T>
T as(const Value& v) {
  return std::get<T>(v);
}

std::vector<CatalogEntry> build_catalog() {
  using D = DataType;
  std::vector<CatalogEntry> c;
  c.push_back(fc("AddI", {in("a", D::Int), in("b", D::Int), out("y", D::Int)}, {"y := a + b;"},
                 [](const std::vector<Value>& v) -> Value {
                   return static_cast<std::int16_t>(as<std::int16_t>(v[0]) + as<std::int16_t>(v[1]));
                 }));
  c.push_back(fc("SubD", {in("a", D::Dint), in("b", D::Dint), out("y", D::Dint)}, {"y := a - b;"},
                 [](const std::vector<Value>& v) -> Value {
                   return static_cast<std::int32_t>(std::int64_t{as<std::int32_t>(v[0])} - as<std::int32_t>(v[1]));
                 }));
  c.push_back(fc("MulR", {in("a", D::Real), in("b", D::Real), out("y", D::Real)}, {"y := a * b;"},
                 [](const std::vector<Value>& v) -> Value { return as<float>(v[0]) * as<float>(v[1]); }));
  c.push_back(fc("AddL", {in("a", D::Lreal), in("b", D::Lreal), out("y", D::Lreal)}, {"y := a + b;"},
                 [](const std::vector<Value>& v) -> Value { return as<double>(v[0]) + as<double>(v[1]); }));
  c.push_back(fc("GtR", {in("a", D::Real), in("b", D::Real), out("y", D::Bool)}, {"y := a > b;"},
                 [](const std::vector<Value>& v) -> Value { return as<float>(v[0]) > as<float>(v[1]); }));
  c.push_back(fc("AndB", {in("a", D::Bool), in("b", D::Bool), out("y", D::Bool)}, {"y := a AND b;"},
                 [](const std::vector<Value>& v) -> Value { return as<bool>(v[0]) && as<bool>(v[1]); }));
  c.push_back(fc("SelI", {in("c", D::Bool), in("a", D::Int), in("b", D::Int), out("y", D::Int)},
                 {"IF c THEN", "    y := a;", "ELSE", "    y := b;", "END_IF;"},
                 [](const std::vector<Value>& v) -> Value { return as<bool>(v[0]) ? v[1] : v[2]; }));
  c.push_back(fc("WidenI", {in("x", D::Int), out("y", D::Dint)}, {"y := INT_TO_DINT(x);"},
                 [](const std::vector<Value>& v) -> Value { return std::int32_t{as<std::int16_t>(v[0])}; }));
  c.push_back(fc("ToReal", {in("x", D::Int), out("y", D::Real)}, {"y := INT_TO_REAL(x);"},
                 [](const std::vector<Value>& v) -> Value { return static_cast<float>(as<std::int16_t>(v[0])); }));
  c.push_back(fc("MaxD", {in("a", D::Dint), in("b", D::Dint), out("y", D::Dint)},
                 {"IF a > b THEN", "    y := a;", "ELSE", "    y := b;", "END_IF;"},
                 [](const std::vector<Value>& v) -> Value {
                   return std::max(as<std::int32_t>(v[0]), as<std::int32_t>(v[1]));
                 }));
  c.push_back(fc("NotB", {in("x", D::Bool), out("y", D::Bool)}, {"y := NOT x;"},
                 [](const std::vector<Value>& v) -> Value { return !as<bool>(v[0]); }));
  c.push_back(fc("ScaleL", {in("x", D::Lreal), out("y", D::Lreal)}, {"y := x * 2.5 + 1.0;"},
                 [](const std::vector<Value>& v) -> Value { return as<double>(v[0]) * 2.5 + 1.0; }));
  c.push_back(fc("HalfR", {in("x", D::Real), out("y", D::Real)}, {"y := x / 2.0;"},
                 [](const std::vector<Value>& v) -> Value { return as<float>(v[0]) / 2.0f; }));
  return c;
}

Literal random_literal(std::mt19937_64& rng, DataType t) {
  switch (t) {
    case DataType::Bool: return std::bernoulli_distribution(0.5)(rng);
    case DataType::Int: return std::int64_t{std::uniform_int_distribution<int>(-300, 300)(rng)};
    case DataType::Dint: return std::int64_t{std::uniform_int_distribution<int>(-100000, 100000)(rng)};
    case DataType::Real:
    case DataType::Lreal: return std::uniform_int_distribution<int>(-400, 400)(rng) / 4.0;
  }
  return false;
}

Value literal_value(const Literal& l, DataType t) {
  switch (t) {
    case DataType::Bool: return std::get<bool>(l);
    case DataType::Int: return static_cast<std::int16_t>(std::get<std::int64_t>(l));
    case DataType::Dint: return static_cast<std::int32_t>(std::get<std::int64_t>(l));
    case DataType::Real: return static_cast<float>(std::get<double>(l));
    case DataType::Lreal: return std::get<double>(l);
  }
  return false;
}

Value zero(DataType t) {
  switch (t) {
    case DataType::Bool: return false;
    case DataType::Int: return std::int16_t{0};
    case DataType::Dint: return std::int32_t{0};
    case DataType::Real: return 0.0f;
    case DataType::Lreal: return 0.0;
  }
  return false;
}

const TransientBlock* find_tb(const Model& m, const std::string& id) {
  for (const auto& b : m.blocks)
    if (const auto* t = std::get_if<TransientBlock>(&b); t && t->id == id) return t;
  return nullptr;
}

PersistentBlock& top_block(GeneratedCase& c) { return std::get<PersistentBlock>(c.model.blocks.back()); }

bool is_constraint(const PersistentBlock& b, const std::string& instance) {
  return std::any_of(b.constraints.begin(), b.constraints.end(),
                     [&](const ConstraintProperty& cp) { return cp.name == instance; });
}

bool attached(const PersistentBlock& b, const OrderedFlow& f) {
  return is_constraint(b, f.source.instance) || is_constraint(b, f.target.instance);
}

}  // namespace

const std::vector<CatalogEntry>& fc_catalog() {
  static const std::vector<CatalogEntry> catalog = build_catalog();
  return catalog;
}

const char* expected_code(Violation v) {
  switch (v) {
    case Violation::None: return "";
    case Violation::DuplicateOrder: return "E_DUP_ORDER";
    case Violation::ConstraintFlowOrder: return "E_FC_FLOW_NONZERO";
    case Violation::TransientOutCount: return "E_TB_OUT_COUNT";
    case Violation::ConstraintOrder: return "E_ORDER_NONPOSITIVE";
    case Violation::ConstraintChain: return "E_FC_CHAIN";
  }
  return "";
}

DataType BlockGenerator::random_type() { return kAllDataTypes[uniform(0, 4)]; }

Value BlockGenerator::random_value(DataType t) {
  switch (t) {
    case DataType::Bool: return chance(0.5);
    case DataType::Int:
      return static_cast<std::int16_t>(uniform(std::numeric_limits<std::int16_t>::min(),
                                               std::numeric_limits<std::int16_t>::max()));
    case DataType::Dint:
      return static_cast<std::int32_t>(std::uniform_int_distribution<std::int32_t>(
          std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max())(rng_));
    case DataType::Real: return static_cast<float>(std::uniform_real_distribution<double>(-1000, 1000)(rng_));
    case DataType::Lreal: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
  }
  return false;
}

PersistentBlock BlockGenerator::random_block(const std::string& id,
                                             const std::vector<const PersistentBlock*>& children, int max_members,
                                             int max_flows) {
  PersistentBlock b;
  b.id = b.name = id;
  const int n_in = uniform(1, 3);
  for (int i = 0; i < n_in; ++i) b.in_ports.push_back({"In" + std::to_string(i + 1), random_type()});
  const int n_out = uniform(1, 3);
  for (int i = 0; i < n_out; ++i) b.out_ports.push_back({"Out" + std::to_string(i + 1), random_type()});
  const int n_val = uniform(0, 2);
  for (int i = 0; i < n_val; ++i) {
    const DataType t = random_type();
    b.values.push_back({"V" + std::to_string(i + 1), t, random_literal(rng_, t)});
  }

  struct Feature {
    std::string instance;
    std::string name;
    DataType type;
  };
  // Readable and writable features as they stand, for the current members.
  auto readable = [&](DataType t) {
    std::vector<Feature> out;
    for (const auto& p : b.in_ports) if (p.type == t) out.push_back({"self", p.name, t});
    for (const auto& p : b.out_ports) if (p.type == t) out.push_back({"self", p.name, t});
    for (const auto& v : b.values) if (v.type == t) out.push_back({"self", v.name, t});
    for (const auto& part : b.parts) {
      const PersistentBlock* child = nullptr;
      for (const auto* c : children) if (c->id == part.type) child = c;
      for (const auto& p : child->out_ports) if (p.type == t) out.push_back({part.name, p.name, t});
    }
    return out;
  };
  auto writable = [&](DataType t) {
    std::vector<Feature> out;
    for (const auto& p : b.out_ports) if (p.type == t) out.push_back({"self", p.name, t});
    for (const auto& v : b.values) if (v.type == t) out.push_back({"self", v.name, t});
    for (const auto& part : b.parts) {
      const PersistentBlock* child = nullptr;
      for (const auto* c : children) if (c->id == part.type) child = c;
      for (const auto& p : child->in_ports) if (p.type == t) out.push_back({part.name, p.name, t});
    }
    return out;
  };
  auto pick = [&](const std::vector<Feature>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; };

  // Distinct positive orderNumbers, shuffled so member kinds interleave.
  std::vector<std::int64_t> orders(static_cast<std::size_t>(max_members + max_flows));
  std::iota(orders.begin(), orders.end(), 1);
  std::shuffle(orders.begin(), orders.end(), rng_);
  std::size_t next_order = 0;

  const int members = uniform(1, max_members);
  int flows_left = max_flows;
  for (int m = 0; m < members; ++m) {
    if (!children.empty() && chance(0.3)) {
      const auto* child = children[static_cast<std::size_t>(uniform(0, static_cast<int>(children.size()) - 1))];
      const std::int64_t order = chance(0.15) ? 0 : orders[next_order++];
      b.parts.push_back({"p" + std::to_string(m + 1), child->id, order});
      continue;
    }
    const auto& entry = fc_catalog()[static_cast<std::size_t>(uniform(0, static_cast<int>(fc_catalog().size()) - 1))];
    const int ins = static_cast<int>(entry.block.params.size()) - 1;
    if (ins > flows_left) break;
    const std::string name = "c" + std::to_string(m + 1);
    std::vector<OrderedFlow> bindings;
    for (const auto& p : entry.block.params) {
      if (p.direction == PortDirection::Out) {
        auto targets = writable(p.type);
        if (!targets.empty() && flows_left - ins > 0 && chance(0.8)) {
          const auto t = pick(targets);
          bindings.push_back({{name, p.name}, {t.instance, t.name}, 0});
        }
        continue;
      }
      auto sources = readable(p.type);
      if (sources.empty()) {
        b.in_ports.push_back({"In" + std::to_string(b.in_ports.size() + 1), p.type});
        sources = readable(p.type);
      }
      const auto s = pick(sources);
      bindings.push_back({{s.instance, s.name}, {name, p.name}, 0});
    }
    b.constraints.push_back({name, entry.block.id, orders[next_order++]});
    flows_left -= static_cast<int>(bindings.size());
    b.flows.insert(b.flows.end(), bindings.begin(), bindings.end());
  }

  // Free flows fill part of the remaining budget.
  const int free_flows = flows_left > 0 ? uniform(0, std::min(flows_left, 4)) : 0;
  for (int i = 0; i < free_flows; ++i) {
    const DataType t = random_type();
    auto sources = readable(t);
    auto targets = writable(t);
    if (sources.empty() || targets.empty()) continue;
    const auto s = pick(sources);
    const auto d = pick(targets);
    b.flows.push_back({{s.instance, s.name}, {d.instance, d.name}, orders[next_order++]});
  }
  // Scramble declaration order so emission order must come from the numbers.
  std::shuffle(b.flows.begin(), b.flows.end(), rng_);
  return b;
}

GeneratedCase BlockGenerator::valid_case(int max_members) {
  GeneratedCase c;
  for (const auto& e : fc_catalog()) c.model.blocks.push_back(e.block);
  std::vector<PersistentBlock> helpers;
  const int n_helpers = uniform(0, 2);
  for (int i = 0; i < n_helpers; ++i) helpers.push_back(random_block("Helper" + std::to_string(i + 1), {}, 3, 6));
  std::vector<const PersistentBlock*> children;
  for (const auto& h : helpers) children.push_back(&h);
  PersistentBlock top = random_block(c.top, children, max_members, 12);
  for (auto& h : helpers) c.model.blocks.push_back(std::move(h));
  c.model.blocks.push_back(std::move(top));
  return c;
}

bool BlockGenerator::violate(GeneratedCase& c, Violation v) {
  PersistentBlock& b = top_block(c);
  switch (v) {
    case Violation::None: return true;
    case Violation::DuplicateOrder: {
      std::vector<std::int64_t*> numbered;
      for (auto& p : b.parts) if (p.order > 0) numbered.push_back(&p.order);
      for (auto& cp : b.constraints) numbered.push_back(&cp.order);
      for (auto& f : b.flows) if (f.order > 0 && !attached(b, f)) numbered.push_back(&f.order);
      if (numbered.size() < 2) return false;
      std::shuffle(numbered.begin(), numbered.end(), rng_);
      *numbered[1] = *numbered[0];
      return true;
    }
    case Violation::ConstraintFlowOrder: {
      std::vector<OrderedFlow*> bound;
      for (auto& f : b.flows) if (attached(b, f)) bound.push_back(&f);
      if (bound.empty()) return false;
      auto* f = bound[static_cast<std::size_t>(uniform(0, static_cast<int>(bound.size()) - 1))];
      f->order = chance(0.2) ? -uniform(1, 5) : uniform(100, 200);
      return true;
    }
    case Violation::TransientOutCount: {
      if (b.constraints.empty()) return false;
      const auto& cp = b.constraints[static_cast<std::size_t>(uniform(0, static_cast<int>(b.constraints.size()) - 1))];
      for (auto& blk : c.model.blocks) {
        auto* tb = std::get_if<TransientBlock>(&blk);
        if (!tb || tb->id != cp.type) continue;
        if (chance(0.5)) {
          tb->params.push_back({"extra", PortDirection::Out, DataType::Bool});
        } else {
          for (auto& p : tb->params)
            if (p.direction == PortDirection::Out) p.direction = PortDirection::In;
        }
        return true;
      }
      return false;
    }
    case Violation::ConstraintOrder: {
      if (b.constraints.empty()) return false;
      auto& cp = b.constraints[static_cast<std::size_t>(uniform(0, static_cast<int>(b.constraints.size()) - 1))];
      cp.order = -uniform(0, 3);
      return true;
    }
    case Violation::ConstraintChain: {
      if (b.constraints.empty()) return false;
      const auto& from = b.constraints[static_cast<std::size_t>(uniform(0, static_cast<int>(b.constraints.size()) - 1))];
      const auto& to = b.constraints[static_cast<std::size_t>(uniform(0, static_cast<int>(b.constraints.size()) - 1))];
      const TransientBlock* ft = find_tb(c.model, from.type);
      const TransientBlock* tt = find_tb(c.model, to.type);
      std::string out_param, in_param;
      for (const auto& p : ft->params) if (p.direction == PortDirection::Out) out_param = p.name;
      for (const auto& p : tt->params) if (p.direction == PortDirection::In) in_param = p.name;
      b.flows.push_back({{from.name, out_param}, {to.name, in_param}, 0});
      return true;
    }
  }
  return false;
}

DataflowOracle::DataflowOracle(const Model& model) {
  for (const auto& blk : model.blocks) {
    if (const auto* pb = std::get_if<PersistentBlock>(&blk)) blocks_[pb->id] = pb;
    if (const auto* tb = std::get_if<TransientBlock>(&blk)) {
      for (const auto& e : fc_catalog())
        if (e.block.id == tb->id) fcs_[tb->id] = &e;
    }
  }
}

const PersistentBlock& DataflowOracle::persistent(const std::string& id) const {
  auto it = blocks_.find(id);
  if (it == blocks_.end()) throw std::logic_error("oracle: unknown block " + id);
  return *it->second;
}

OracleState DataflowOracle::initial_state(const std::string& id) const {
  const auto& b = persistent(id);
  OracleState s;
  for (const auto& p : b.in_ports) s.vars[p.name] = zero(p.type);
  for (const auto& p : b.out_ports) s.vars[p.name] = zero(p.type);
  for (const auto& v : b.values) s.vars[v.name] = v.initial ? literal_value(*v.initial, v.type) : zero(v.type);
  for (const auto& p : b.parts) s.parts[p.name] = initial_state(p.type);
  return s;
}

void DataflowOracle::scan(const std::string& id, OracleState& s) const {
  const auto& b = persistent(id);
  auto read = [&](const FlowEnd& e) -> Value {
    return e.instance == kSelfInstance ? s.vars.at(e.feature) : s.parts.at(e.instance).vars.at(e.feature);
  };
  auto write = [&](const FlowEnd& e, const Value& v) {
    if (e.instance == kSelfInstance)
      s.vars.at(e.feature) = v;
    else
      s.parts.at(e.instance).vars.at(e.feature) = v;
  };

  struct Item {
    std::int64_t order;
    std::function<void()> run;
  };
  std::vector<Item> items;
  for (const auto& p : b.parts)
    if (p.order > 0) items.push_back({p.order, [&, &p = p] { scan(p.type, s.parts.at(p.name)); }});
  for (const auto& cp : b.constraints) {
    if (cp.order <= 0) continue;
    items.push_back({cp.order, [&, &cp = cp] {
                       const CatalogEntry& fc = *fcs_.at(cp.type);
                       std::vector<Value> args;
                       std::string out_name;
                       for (const auto& param : fc.block.params) {
                         if (param.direction == PortDirection::Out) {
                           out_name = param.name;
                           continue;
                         }
                         for (const auto& f : b.flows)
                           if (f.target.instance == cp.name && f.target.feature == param.name) args.push_back(read(f.source));
                       }
                       const Value result = fc.eval(args);
                       for (const auto& f : b.flows)
                         if (f.source.instance == cp.name && f.source.feature == out_name) write(f.target, result);
                     }});
  }
  for (const auto& f : b.flows)
    if (f.order > 0 && !attached(b, f)) items.push_back({f.order, [&, &f = f] { write(f.target, read(f.source)); }});
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.order < y.order; });
  for (const auto& item : items) item.run();
}

}  // namespace maspc::testing
