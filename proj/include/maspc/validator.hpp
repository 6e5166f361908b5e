#pragma once

#include <string>

#include "maspc/diagnostic.hpp"
#include "maspc/resolve.hpp"

namespace maspc {

struct ValidateOptions {
  /// Accept INT->DINT and REAL->LREAL across connections and flows (W_WIDEN).
  bool allow_widening = false;
};

struct ValidationReport {
  Diagnostics diagnostics;
  bool passed = true;  // no error-severity diagnostics
};

/// Ordering and shape rules of one PersistentBlock:
///   E_DUP_ORDER          invoked parts, constraint properties and free flows
///                        share one orderNumber namespace per block
///   E_ORDER_NONPOSITIVE  constraint property or free flow with order <= 0,
///                        part with order < 0
///   E_FC_FLOW_NONZERO    flow attached to a constraint property with order != 0
///   E_FC_CHAIN           flow between two constraint parameters
///   E_FC_MULTI_BIND      constraint in-parameter bound twice, or more than
///                        one flow leaving the out-parameter
///   E_UNBOUND_FC_PARAM   invoked constraint with an unbound in-parameter
///   E_FLOW_DIRECTION     source not readable or target not writable
Diagnostics validate_block_restrictions(const ResolvedModel& model, const PersistentBlock& block);

/// E_TB_OUT_COUNT (not exactly one out parameter) and E_BODY_PARSE (body
/// empty or not valid in the ST subset).
Diagnostics validate_block_restrictions(const TransientBlock& block, const std::string& path);

/// Type compatibility of data connections and block flows (E_TYPE_INCOMPAT,
/// W_WIDEN) and out->in direction of data connections (E_FLOW_DIRECTION).
Diagnostics validate_connections(const ResolvedModel& model, const ValidateOptions& options = {});

/// Allocation, realization, traceability and deployment completeness.
Diagnostics validate_system(const ResolvedModel& model);

/// W_BUDGET and W_NFR_TIME lints.
Diagnostics check_timing_budget(const ResolvedModel& model);

/// Everything above, in a fixed order. Deterministic.
ValidationReport validate(const ResolvedModel& model, const ValidateOptions& options = {});

std::string report_to_json(const ValidationReport& report);
std::string report_to_text(const ValidationReport& report, bool color = false);

}  // namespace maspc
