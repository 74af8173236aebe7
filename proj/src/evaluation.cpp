#include "chainarg/evaluation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "chainarg/schemes.hpp"

namespace chainarg {

using nlohmann::json;

namespace {

// dependents[i]: indexes of arguments that transitively rest on argument i.
std::vector<std::vector<std::size_t>> dependents(const CaseFile& c) {
  const auto n = c.arguments.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(c.arguments[i].arg_id, i);

  std::vector<std::vector<std::size_t>> supported_by(n);  // direct reverse edges
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& s : c.arguments[i].premise_support) {
      if (s.kind != Support::Kind::argument) continue;
      auto it = index.find(s.ref);
      if (it != index.end()) supported_by[it->second].push_back(i);
    }
  }

  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack = supported_by[i];
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      if (seen[x]) continue;
      seen[x] = true;
      for (auto y : supported_by[x]) stack.push_back(y);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j] && j != i) out[i].push_back(j);
    }
  }
  return out;
}

bool cq_attacks(CqKind kind, CqState state, const FrameworkOptions& options) {
  switch (kind) {
    case CqKind::assumption:
      return state == CqState::unfavourable || (state == CqState::open && options.open_assumptions_attack);
    case CqKind::exception:
      return state == CqState::unfavourable;
    case CqKind::supportive:
      return false;
  }
  return false;
}

}  // namespace

ArgumentationFramework build_framework(const CaseFile& c, const FrameworkOptions& options) {
  ArgumentationFramework af;
  const auto n = c.arguments.size();
  for (const auto& a : c.arguments) af.add_node({a.arg_id, Node::Kind::argument, {}, {}});

  struct Objection {
    std::size_t node;
    std::size_t target;
    AttackReason reason;
  };
  std::vector<Objection> objections;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = c.arguments[i];
    for (const auto& q : find_scheme(a.scheme_id).cqs) {
      const auto state = a.cq_state.at(q.cq_id).state;
      if (!cq_attacks(q.kind, state, options)) continue;
      const auto node = af.add_node({"obj_" + a.arg_id + "_" + q.cq_id, Node::Kind::objection, a.arg_id, q.cq_id});
      objections.push_back({node, i,
                            q.kind == CqKind::assumption ? AttackReason::cq_assumption : AttackReason::cq_exception});
    }
  }

  const auto deps = dependents(c);
  auto attack = [&](std::size_t from, std::size_t target_arg, AttackReason reason) {
    if (from != target_arg) af.add_attack(from, target_arg, reason);
    for (auto d : deps[target_arg]) {
      if (d != from) af.add_attack(from, d, reason);
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && c.arguments[i].conclusion.contrary_to(c.arguments[j].conclusion)) {
        attack(i, j, AttackReason::rebut);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& concl = c.arguments[i].conclusion;
      const auto& premises = c.arguments[j].premises;
      if (std::any_of(premises.begin(), premises.end(), [&](const Statement& p) { return concl.contrary_to(p); })) {
        attack(i, j, AttackReason::undermine);
      }
    }
  }
  for (auto reason : {AttackReason::cq_assumption, AttackReason::cq_exception}) {
    for (const auto& o : objections) {
      if (o.reason == reason) attack(o.node, o.target, reason);
    }
  }
  return af;
}

Label statement_status(const CaseFile& c, const ArgumentationFramework& af, const Labelling& lab,
                       const Statement& s) {
  bool any = false;
  bool all_out = true;
  for (const auto& a : c.arguments) {
    if (a.conclusion != s) continue;
    const auto idx = af.index_of(a.arg_id);
    if (!idx) continue;
    any = true;
    if (lab.at(*idx) == Label::in) return Label::in;
    if (lab.at(*idx) != Label::out) all_out = false;
  }
  return any && all_out ? Label::out : Label::undec;
}

Label Evaluation::label_of(std::string_view node_id) const {
  const auto idx = af.index_of(node_id);
  if (!idx) throw std::out_of_range("no node " + std::string(node_id));
  return labelling.at(*idx);
}

const StatementStatus* Evaluation::status_of(const Statement& s) const {
  auto it = std::find_if(statuses.begin(), statuses.end(), [&](const StatementStatus& st) { return st.statement == s; });
  return it == statuses.end() ? nullptr : &*it;
}

Evaluation evaluate(const CaseFile& c, const FrameworkOptions& options) {
  Evaluation e;
  e.af = build_framework(c, options);
  e.labelling = grounded_labelling(e.af);
  for (const auto& a : c.arguments) {
    auto it = std::find_if(e.statuses.begin(), e.statuses.end(),
                           [&](const StatementStatus& st) { return st.statement == a.conclusion; });
    if (it == e.statuses.end()) {
      e.statuses.push_back({a.conclusion, Label::undec, {}});
      it = std::prev(e.statuses.end());
    }
    it->concluded_by.push_back(a.arg_id);
  }
  for (auto& st : e.statuses) st.status = statement_status(c, e.af, e.labelling, st.statement);
  return e;
}

json to_json(const Evaluation& e) {
  json statements = json::array();
  for (const auto& st : e.statuses) {
    statements.push_back(
        {{"statement", st.statement.to_string()}, {"status", to_string(st.status)}, {"arguments", st.concluded_by}});
  }
  return {{"semantics", "grounded"},
          {"labelling", to_json(e.af, e.labelling)},
          {"statements", statements},
          {"framework", to_json(e.af)}};
}

}  // namespace chainarg
