#include "chainarg/engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "chainarg/error.hpp"
#include "chainarg/heuristics.hpp"

namespace chainarg {

namespace {

std::vector<std::string> inputs_of(const TransactionSet& chain, std::string_view txid) {
  const auto* tx = chain.find(txid);
  if (tx == nullptr) return {};
  return input_addresses(*tx, chain);
}

bool pays_to(const Transaction& tx, std::string_view address) {
  return std::any_of(tx.outputs.begin(), tx.outputs.end(),
                     [&](const TxOutput& o) { return o.address == address; });
}

std::size_t distinct_outputs(const Transaction& tx) {
  std::set<std::string_view> seen;
  for (const auto& o : tx.outputs) seen.insert(o.address);
  return seen.size();
}

bool contains(const std::vector<std::string>& v, std::string_view x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

bool entails(const Statement& from, const Statement& to, const TransactionSet* chain) {
  if (from == to) return true;
  if (chain == nullptr || from.negated() || to.negated()) return false;

  if (from.predicate() == Predicate::controls_all_inputs && to.predicate() == Predicate::controls) {
    return from.arg(0) == to.arg(0) && contains(inputs_of(*chain, from.arg(1)), to.arg(1));
  }
  if (from.predicate() == Predicate::controls && to.predicate() == Predicate::controls_all_inputs) {
    if (from.arg(0) != to.arg(0)) return false;
    const auto inputs = inputs_of(*chain, to.arg(1));
    return inputs.size() == 1 && inputs.front() == from.arg(1);
  }
  return false;
}

std::optional<bool> chain_fact(const Statement& s, const TransactionSet* chain) {
  if (chain == nullptr) return std::nullopt;
  const Transaction* tx = nullptr;
  switch (s.predicate()) {
    case Predicate::multi_input:
    case Predicate::multi_output:
    case Predicate::is_change:
      tx = chain->find(s.arg(0));
      break;
    default:
      return std::nullopt;
  }
  if (tx == nullptr) return std::nullopt;

  bool value = false;
  if (s.predicate() == Predicate::multi_input) {
    value = input_addresses(*tx, *chain).size() >= 2;
  } else if (s.predicate() == Predicate::multi_output) {
    value = distinct_outputs(*tx) >= 2;
  } else {
    value = pays_to(*tx, s.arg(1));
  }
  return value != s.negated();
}

void check_chain_constraints(const SchemeDefinition& scheme, const Bindings& bindings, const TransactionSet* chain) {
  if (chain == nullptr) return;
  auto bound = [&](const char* var) -> const std::string& { return bindings.at(var); };

  if (scheme.scheme_id == scheme_ids::multi_input) {
    if (chain->find(bound("T")) == nullptr) return;
    if (!contains(inputs_of(*chain, bound("T")), bound("A"))) {
      throw GroundingError("address " + bound("A") + " is not an input address of " + bound("T"));
    }
  } else if (scheme.scheme_id == scheme_ids::change) {
    const auto* tx = chain->find(bound("T"));
    if (tx != nullptr && !pays_to(*tx, bound("C"))) {
      throw GroundingError("address " + bound("C") + " is not an output address of " + bound("T"));
    }
  }
}

bool holds(const CaseFile& c, const Statement& s) {
  const auto* chain = c.transactions();
  for (const auto& e : c.evidence) {
    if (entails(e.statement, s, chain)) return true;
  }
  for (const auto& a : c.arguments) {
    if (entails(a.conclusion, s, chain)) return true;
  }
  return false;
}

namespace {

std::string fresh_id(const CaseFile& c, std::string_view prefix) {
  for (std::size_t k = 1;; ++k) {
    auto id = std::string(prefix) + std::to_string(k);
    if (c.find_argument(id) == nullptr) return id;
  }
}

// Evidence item recording a fact read off the transaction graph.
EvidenceItem chain_evidence(const CaseFile& c, const Statement& s) {
  std::string id = "chain_";
  switch (s.predicate()) {
    case Predicate::multi_input:
      id += "multi_input_";
      break;
    case Predicate::multi_output:
      id += "multi_output_";
      break;
    default:
      id += "change_";
      break;
  }
  id += s.arg(0);
  if (s.predicate() == Predicate::is_change) id += "_" + s.arg(1);
  auto unique = id;
  for (int k = 2; c.find_evidence(unique) != nullptr; ++k) unique = id + "_" + std::to_string(k);
  return {unique, s, "transaction graph", "read off the chain file"};
}

void ensure_chain_evidence(CaseFile& c, const Statement& s) {
  if (std::any_of(c.evidence.begin(), c.evidence.end(), [&](const EvidenceItem& e) { return e.statement == s; })) {
    return;
  }
  c.evidence.push_back(chain_evidence(c, s));
  ++c.revision;
}

std::optional<Support> find_support(const CaseFile& c, const Statement& premise) {
  const auto* chain = c.transactions();
  for (const auto& e : c.evidence) {
    if (e.statement == premise) return Support{Support::Kind::evidence, e.evidence_id};
  }
  for (const auto& a : c.arguments) {
    if (a.conclusion == premise) return Support{Support::Kind::argument, a.arg_id};
  }
  for (const auto& e : c.evidence) {
    if (entails(e.statement, premise, chain)) return Support{Support::Kind::evidence, e.evidence_id};
  }
  for (const auto& a : c.arguments) {
    if (entails(a.conclusion, premise, chain)) return Support{Support::Kind::argument, a.arg_id};
  }
  return std::nullopt;
}

}  // namespace

const Argument& instantiate(CaseFile& c, std::string_view scheme_id, const Bindings& bindings,
                            const InstantiateOptions& options) {
  const auto& scheme = find_scheme(scheme_id);

  for (const auto& v : scheme.variables) {
    if (!bindings.contains(v.name)) throw BindingError("variable " + v.name + " of " + scheme.scheme_id + " is unbound");
  }
  for (const auto& [var, _] : bindings) {
    if (!scheme.variable_kind(var)) throw BindingError(scheme.scheme_id + " has no variable " + var);
  }

  Argument a;
  a.scheme_id = scheme.scheme_id;
  a.bindings = bindings;
  for (const auto& p : scheme.premises) a.premises.push_back(p.instantiate(bindings));
  a.conclusion = scheme.conclusion.instantiate(bindings);

  try {
    for (const auto& p : a.premises) check_references(c, p, "bindings");
    check_references(c, a.conclusion, "bindings");
  } catch (const IntegrityError& e) {
    throw BindingError(e.what());
  }
  check_chain_constraints(scheme, bindings, c.transactions());

  for (const auto& other : c.arguments) {
    if (other.scheme_id == a.scheme_id && other.bindings == a.bindings) {
      throw IntegrityError("argument " + other.arg_id + " already instantiates " + a.scheme_id +
                           " with these bindings");
    }
  }

  a.arg_id = options.arg_id.empty() ? fresh_id(c, "arg_") : options.arg_id;
  if (!valid_argument_id(a.arg_id)) throw IntegrityError("invalid argument id '" + a.arg_id + "'");
  if (c.find_argument(a.arg_id) != nullptr) throw IntegrityError("duplicate argument id " + a.arg_id);

  for (const auto& [index, _] : options.support) {
    if (index >= a.premises.size()) {
      throw GroundingError(a.scheme_id + " has no premise " + std::to_string(index));
    }
  }
  std::vector<EvidenceItem> pending;  // graph facts to record on success
  for (std::size_t i = 0; i < a.premises.size(); ++i) {
    const auto& premise = a.premises[i];
    const auto where = "premise " + std::to_string(i) + " '" + premise.to_string() + "'";
    if (auto it = options.support.find(i); it != options.support.end()) {
      const auto& sup = it->second;
      const Statement* source = nullptr;
      if (sup.kind == Support::Kind::evidence) {
        const auto* ev = c.find_evidence(sup.ref);
        if (ev == nullptr) throw GroundingError(where + ": unknown evidence " + sup.ref);
        source = &ev->statement;
      } else {
        if (sup.ref == a.arg_id) throw GroundingError(where + ": an argument cannot support itself");
        const auto* other = c.find_argument(sup.ref);
        if (other == nullptr) throw GroundingError(where + ": unknown argument " + sup.ref);
        source = &other->conclusion;
      }
      if (!entails(*source, premise, c.transactions())) {
        throw GroundingError(where + " is not supported by " + sup.ref);
      }
      a.premise_support.push_back(sup);
    } else if (auto found = find_support(c, premise)) {
      a.premise_support.push_back(*found);
    } else if (chain_fact(premise, c.transactions()) == true) {
      auto ev = chain_evidence(c, premise);
      a.premise_support.push_back({Support::Kind::evidence, ev.evidence_id});
      pending.push_back(std::move(ev));
    } else {
      throw GroundingError(where + " has no supporting evidence or argument");
    }
  }

  for (const auto& q : scheme.cqs) a.cq_state[q.cq_id] = CqStatus{};
  for (auto& ev : pending) c.evidence.push_back(std::move(ev));
  c.arguments.push_back(std::move(a));
  ++c.revision;
  return c.arguments.back();
}

namespace {

bool concluded_by(const CaseFile& c, std::string_view scheme_id, const Statement& s) {
  return std::any_of(c.arguments.begin(), c.arguments.end(),
                     [&](const Argument& a) { return a.scheme_id == scheme_id && a.conclusion == s; });
}

}  // namespace

std::vector<Argument> auto_instantiate(CaseFile& c) {
  std::vector<Argument> added;
  const auto* chain = c.transactions();
  if (chain == nullptr) return added;

  auto emit = [&](std::string_view scheme_id, const Bindings& b) {
    InstantiateOptions opts;
    opts.arg_id = fresh_id(c, "auto_");
    added.push_back(instantiate(c, scheme_id, b, opts));
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& tx : chain->transactions()) {
      if (tx.is_coinbase) continue;
      const auto inputs = input_addresses(tx, *chain);

      const bool coinjoin = c.heuristics.apply_coinjoin_filter && detect_coinjoin(tx, *chain, c.heuristics).is_coinjoin;
      if (inputs.size() >= 2 && !coinjoin) {
        for (const auto& e : c.entities) {
          const Statement goal(Predicate::controls_all_inputs, {e.id, tx.txid});
          if (concluded_by(c, scheme_ids::multi_input, goal)) continue;
          auto a = std::find_if(inputs.begin(), inputs.end(), [&](const std::string& addr) {
            return holds(c, Statement(Predicate::controls, {e.id, addr}));
          });
          if (a == inputs.end()) continue;
          ensure_chain_evidence(c, Statement(Predicate::multi_input, {tx.txid}));
          emit(scheme_ids::multi_input, {{"T", tx.txid}, {"E", e.id}, {"A", *a}});
          changed = true;
        }
      }

      if (distinct_outputs(tx) < 2) continue;
      const auto verdict = detect_change_output(tx, *chain, c.heuristics);
      if (!verdict) continue;
      const auto& change = tx.outputs[verdict->output_index].address;
      for (const auto& e : c.entities) {
        const Statement goal(Predicate::controls, {e.id, change});
        if (concluded_by(c, scheme_ids::change, goal)) continue;
        if (!holds(c, Statement(Predicate::controls_all_inputs, {e.id, tx.txid}))) continue;
        ensure_chain_evidence(c, Statement(Predicate::multi_output, {tx.txid}));
        ensure_chain_evidence(c, Statement(Predicate::is_change, {tx.txid, change}));
        emit(scheme_ids::change, {{"T", tx.txid}, {"C", change}, {"E", e.id}});
        changed = true;
      }
    }
  }
  return added;
}

void answer_cq(CaseFile& c, std::string_view arg_id, std::string_view cq_id, CqState answer,
               std::string justification) {
  if (answer == CqState::open) throw std::invalid_argument("an answer must be favourable or unfavourable");
  auto* a = c.find_argument(arg_id);
  if (a == nullptr) throw NotFoundError("no argument " + std::string(arg_id));
  auto it = a->cq_state.find(std::string(cq_id));
  if (it == a->cq_state.end()) {
    throw NotFoundError("argument " + a->arg_id + " has no critical question " + std::string(cq_id));
  }
  it->second = {answer, justification};
  const std::uint64_t seq = c.cq_answers.empty() ? 1 : c.cq_answers.back().seq + 1;
  c.cq_answers.push_back({seq, a->arg_id, it->first, answer, std::move(justification)});
  ++c.revision;
}

std::vector<CqEntry> list_cqs(const CaseFile& c, bool open_only) {
  std::vector<CqEntry> out;
  for (const auto& a : c.arguments) {
    const auto& scheme = find_scheme(a.scheme_id);
    for (const auto& q : scheme.cqs) {
      const auto& st = a.cq_state.at(q.cq_id);
      if (open_only && st.state != CqState::open) continue;
      out.push_back({a.arg_id, q.cq_id, q.kind, st.state, q.text.render(a.bindings), st.justification});
    }
  }
  return out;
}

void remove_argument(CaseFile& c, std::string_view arg_id) {
  auto it = std::find_if(c.arguments.begin(), c.arguments.end(), [&](const Argument& a) { return a.arg_id == arg_id; });
  if (it == c.arguments.end()) throw NotFoundError("no argument " + std::string(arg_id));
  for (const auto& other : c.arguments) {
    for (const auto& s : other.premise_support) {
      if (s.kind == Support::Kind::argument && s.ref == arg_id) {
        throw IntegrityError("argument " + other.arg_id + " relies on " + std::string(arg_id));
      }
    }
  }
  c.arguments.erase(it);
  ++c.revision;
}

void add_evidence(CaseFile& c, EvidenceItem item) {
  if (item.evidence_id.empty()) throw IntegrityError("evidence with empty id");
  if (c.find_evidence(item.evidence_id) != nullptr) throw IntegrityError("duplicate evidence id " + item.evidence_id);
  check_references(c, item.statement, "evidence " + item.evidence_id);
  if (chain_fact(item.statement, c.transactions()) == false) {
    throw IntegrityError("evidence " + item.evidence_id + ": " + item.statement.to_string() +
                         " contradicts the transaction graph");
  }
  c.evidence.push_back(std::move(item));
  ++c.revision;
}

}  // namespace chainarg
