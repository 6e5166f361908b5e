#pragma once

// Helpers shared by the unit suites: the PPU fixture as editable JSON and
// shortcuts from a JSON document to diagnostics.

#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "harness.hpp"
#include "json.hpp"
#include "maspc/model_format.hpp"
#include "maspc/resolve.hpp"
#include "maspc/validator.hpp"

namespace maspc::testing {

using nlohmann::json;

inline json fixture_json(const std::string& name) {
  return json::parse(read_text(source_dir() / "tests" / "fixtures" / name));
}

inline std::shared_ptr<const ResolvedModel> resolve_json(const json& doc) {
  auto parsed = parse_model(doc.dump());
  REQUIRE_MESSAGE(parsed.model, (parsed.diagnostics.empty() ? "" : parsed.diagnostics.front().message));
  auto res = resolve_model(std::move(*parsed.model));
  REQUIRE_MESSAGE(res.model, (res.diagnostics.empty() ? "" : res.diagnostics.front().message));
  return res.model;
}

inline Diagnostics validate_json(const json& doc, ValidateOptions opts = {}) {
  return validate(*resolve_json(doc), opts).diagnostics;
}

inline std::vector<std::string> codes(const Diagnostics& diags) {
  std::vector<std::string> out;
  for (const auto& d : diags) out.push_back(d.code);
  return out;
}

inline bool has_code(const Diagnostics& diags, const std::string& code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

inline const Diagnostic* find_code(const Diagnostics& diags, const std::string& code) {
  for (const auto& d : diags)
    if (d.code == code) return &d;
  return nullptr;
}

// Index of the block with this id in the fixture's "blocks" array.
inline json& block(json& doc, const std::string& id) {
  for (auto& b : doc["blocks"])
    if (b["id"] == id) return b;
  FAIL("no block " << id);
  throw;
}

// Two SAs on two nodes joined by one data connection; the port types of
// the receiving side are parameters.
inline json typed_pair(const std::string& from, const std::string& to) {
  auto pass = [](const std::string& id, const std::string& t) {
    return json{{"kind", "persistent"}, {"id", id}, {"name", id},
                {"inPorts", {{{"name", "In"}, {"type", t}}}},
                {"outPorts", {{{"name", "Out"}, {"type", t}}}},
                {"values", json::array()}, {"parts", json::array()}, {"constraints", json::array()},
                {"flows", {{{"source", {{"instance", "self"}, {"feature", "In"}}},
                            {"target", {{"instance", "self"}, {"feature", "Out"}}},
                            {"orderNumber", 1}}}}};
  };
  auto sa = [](const std::string& id, const std::string& t, const std::string& behavior) {
    return json{{"kind", "SA"}, {"id", id}, {"name", id},
                {"ports", {{{"name", "In"}, {"direction", "in"}, {"type", t}},
                           {{"name", "Out"}, {"direction", "out"}, {"type", t}}}},
                {"behavior", behavior}};
  };
  auto node = [](const std::string& id, const std::string& ams) {
    return json{{"kind", "node"}, {"id", id}, {"name", id}, {"busType", "EtherCAT"}, {"busAddress", "1"},
                {"amsNetId", ams}, {"cycleTime", 10}, {"memory", 64}, {"ports", json::array()}};
  };
  return json{{"formatVersion", "1.0.0"},
              {"requirements", json::array()},
              {"relations", json::array()},
              {"functions", {sa("A", from, "PassA"), sa("B", to, "PassB")}},
              {"hardware", {node("N1", "10.0.0.1.1.1"), node("N2", "10.0.0.2.1.1")}},
              {"allocations", {{{"sa", "A"}, {"node", "N1"}}, {{"sa", "B"}, {"node", "N2"}}}},
              {"connections", {{{"id", "c"}, {"kind", "data"},
                                {"source", {{"element", "A"}, {"port", "Out"}}},
                                {"target", {{"element", "B"}, {"port", "In"}}}}}},
              {"blocks", {pass("PassA", from), pass("PassB", to)}}};
}


}  // namespace maspc::testing
