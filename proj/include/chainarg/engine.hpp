#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainarg/case_file.hpp"
#include "chainarg/chain.hpp"
#include "chainarg/schemes.hpp"
#include "chainarg/statement.hpp"

namespace chainarg {

// Strict consequence between ground statements, given the transaction graph:
//   s |= s
//   controls_all_inputs(E,T) |= controls(E,a)   for every input address a of T
//   controls(E,a) |= controls_all_inputs(E,T)   when a is T's only input address
bool entails(const Statement& from, const Statement& to, const TransactionSet* chain);

// Truth of multi_input, multi_output and is_change read off the graph.
// Empty for other predicates, unknown txids, or when there is no chain.
std::optional<bool> chain_fact(const Statement& s, const TransactionSet* chain);

// Scheme-specific side conditions on the graph (the multi-input address must
// be an input of T; the change address an output of T). GroundingError.
void check_chain_constraints(const SchemeDefinition& scheme, const Bindings& bindings,
                             const TransactionSet* chain);

// Some evidence item or argument conclusion entails `s`.
bool holds(const CaseFile& c, const Statement& s);

struct InstantiateOptions {
  std::string arg_id;  // generated as arg_<k> when empty
  std::map<std::size_t, Support> support;  // explicit per-premise support
};

// Adds a new argument with every CQ open. Premises without explicit support
// are grounded on, in order: an evidence item stating it, an argument
// concluding it, then evidence or arguments entailing it.
// Throws NotFoundError (scheme), BindingError, GroundingError, IntegrityError.
const Argument& instantiate(CaseFile& c, std::string_view scheme_id, const Bindings& bindings,
                            const InstantiateOptions& options = {});

// Multi-input and change-address arguments derivable from the graph and the
// control facts already in the case, to a fixpoint. Returns the new arguments.
std::vector<Argument> auto_instantiate(CaseFile& c);

// NotFoundError for an unknown argument or CQ; std::invalid_argument if
// `answer` is open.
void answer_cq(CaseFile& c, std::string_view arg_id, std::string_view cq_id, CqState answer,
               std::string justification);

struct CqEntry {
  std::string arg_id;
  std::string cq_id;
  CqKind kind;
  CqState state;
  std::string text;
  std::string justification;
};

// Ordered by argument, then by the CQ's position in its scheme.
std::vector<CqEntry> list_cqs(const CaseFile& c, bool open_only);
inline std::vector<CqEntry> list_open_cqs(const CaseFile& c) { return list_cqs(c, true); }

// NotFoundError when absent; IntegrityError when another argument relies on it.
void remove_argument(CaseFile& c, std::string_view arg_id);

// IntegrityError on duplicate id, dangling reference or a false chain fact.
void add_evidence(CaseFile& c, EvidenceItem item);

}  // namespace chainarg
