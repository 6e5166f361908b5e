#include "maspc/comm_config.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "maspc/error.hpp"
#include "maspc/identifier.hpp"

namespace maspc {

namespace {

using ordered_json = nlohmann::ordered_json;

const Port* find_port(const SoftwareApplication& sa, std::string_view name) {
  for (const auto& p : sa.ports)
    if (iequals(p.name, name)) return &p;
  return nullptr;
}

struct CrossNodeLink {
  const Connection* connection;
  std::size_t index;
  const SoftwareApplication* pub_sa;
  const Port* pub_port;
  const Node* pub_node;
  const SoftwareApplication* sub_sa;
  const Port* sub_port;
  const Node* sub_node;
};

/// Data connections between SAs on different nodes, in document order.
std::vector<CrossNodeLink> cross_node_links(const ResolvedModel& rm) {
  std::vector<CrossNodeLink> out;
  const auto& conns = rm.model().connections;
  for (std::size_t i = 0; i < conns.size(); ++i) {
    const Connection& c = conns[i];
    if (c.kind != ConnectionKind::Data) continue;
    const SoftwareApplication* a = rm.find_sa(c.source.element);
    const SoftwareApplication* b = rm.find_sa(c.target.element);
    if (!a || !b) continue;
    const Port* pa = find_port(*a, c.source.port);
    const Port* pb = find_port(*b, c.target.port);
    if (!pa || !pb) continue;
    const Node* na = rm.node_of(*a);
    const Node* nb = rm.node_of(*b);
    if (!na || !nb || na == nb) continue;
    // The publisher is always the out-port side.
    if (pa->direction == PortDirection::In && pb->direction == PortDirection::Out) {
      std::swap(a, b);
      std::swap(pa, pb);
      std::swap(na, nb);
    }
    out.push_back({&c, i, a, pa, na, b, pb, nb});
  }
  return out;
}

bool addressable(const Node& n) { return n.ams_net_id.has_value() || !n.bus_address.empty(); }

CommEndpoint endpoint(const Node& n, const SoftwareApplication& sa, const Port& p) {
  return {n.id, n.ams_net_id, n.bus_address, sa.id, p.name};
}

}  // namespace

Diagnostics check_comm_addresses(const ResolvedModel& rm) {
  Diagnostics out;
  std::set<const Node*> reported;
  for (const auto& link : cross_node_links(rm)) {
    for (const Node* n : {link.pub_node, link.sub_node}) {
      if (addressable(*n) || !reported.insert(n).second) continue;
      out.push_back(make_error("E_MISSING_ADDRESS", rm.path_of(n->id),
                               "node '" + n->id + "' takes part in pub/sub exchange (connection '" +
                                   link.connection->id + "') but has neither amsNetId nor busAddress"));
    }
  }
  return out;
}

CommConfig derive_pubsub(const ResolvedModel& rm) {
  CommConfig cfg;
  std::set<std::string> taken;
  for (const auto& link : cross_node_links(rm)) {
    for (const Node* n : {link.pub_node, link.sub_node})
      if (!addressable(*n))
        throw Error("E_MISSING_ADDRESS", "node '" + n->id + "' has neither amsNetId nor busAddress");
    const std::string base = sanitize_identifier(link.pub_sa->name + "_" + link.pub_port->name);
    std::string name = base;
    for (int k = 2; !taken.insert(to_upper(name)).second; ++k) name = base + "_" + std::to_string(k);
    cfg.entries.push_back(CommEntry{name, link.pub_port->type, link.connection->id,
                                    endpoint(*link.pub_node, *link.pub_sa, *link.pub_port),
                                    endpoint(*link.sub_node, *link.sub_sa, *link.sub_port)});
  }
  std::stable_sort(cfg.entries.begin(), cfg.entries.end(), [](const CommEntry& x, const CommEntry& y) {
    if (x.publisher.node != y.publisher.node) return x.publisher.node < y.publisher.node;
    return x.variable < y.variable;
  });
  return cfg;
}

namespace {

ordered_json endpoint_json(const CommEndpoint& e) {
  ordered_json j;
  j["node"] = e.node;
  j["amsNetId"] = e.ams_net_id ? ordered_json(*e.ams_net_id) : ordered_json(nullptr);
  j["busAddress"] = e.bus_address;
  j["sa"] = e.sa;
  j["port"] = e.port;
  return j;
}

CommEndpoint endpoint_from(const nlohmann::json& j) {
  CommEndpoint e;
  e.node = j.at("node").get<std::string>();
  if (!j.at("amsNetId").is_null()) e.ams_net_id = j.at("amsNetId").get<std::string>();
  e.bus_address = j.value("busAddress", "");
  e.sa = j.value("sa", "");
  e.port = j.value("port", "");
  return e;
}

}  // namespace

std::string emit_comm_config(const CommConfig& config) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : config.entries) {
    ordered_json j;
    j["variable"] = e.variable;
    j["type"] = to_string(e.type);
    j["connection"] = e.connection;
    j["publisher"] = endpoint_json(e.publisher);
    j["subscriber"] = endpoint_json(e.subscriber);
    entries.push_back(std::move(j));
  }
  ordered_json doc;
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

CommConfig parse_comm_config(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    CommConfig cfg;
    for (const auto& j : doc.at("entries")) {
      CommEntry e;
      e.variable = j.at("variable").get<std::string>();
      auto t = parse_data_type(j.at("type").get<std::string>());
      if (!t) throw Error("E_SYNTAX", "unknown type in comm config");
      e.type = *t;
      e.connection = j.value("connection", "");
      e.publisher = endpoint_from(j.at("publisher"));
      e.subscriber = endpoint_from(j.at("subscriber"));
      cfg.entries.push_back(std::move(e));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error("E_SYNTAX", std::string("comm config: ") + e.what());
  }
}

}  // namespace maspc
