#include "chainarg/schemes.hpp"

#include <algorithm>
#include <stdexcept>

#include "chainarg/error.hpp"

namespace chainarg {

using nlohmann::json;

std::string TextTemplate::plain() const {
  std::string out;
  out.reserve(raw_.size());
  for (char c : raw_) {
    if (c != '{' && c != '}') out += c;
  }
  return out;
}

std::string TextTemplate::render(const Bindings& bindings) const {
  std::string out;
  std::size_t i = 0;
  while (i < raw_.size()) {
    if (raw_[i] != '{') {
      out += raw_[i++];
      continue;
    }
    const auto close = raw_.find('}', i);
    const auto name = raw_.substr(i + 1, close - i - 1);
    auto it = bindings.find(name);
    out += it == bindings.end() ? name : it->second;
    i = close + 1;
  }
  return out;
}

std::vector<std::string> TextTemplate::variables() const {
  std::vector<std::string> out;
  std::size_t i = 0;
  while ((i = raw_.find('{', i)) != std::string::npos) {
    const auto close = raw_.find('}', i);
    auto name = raw_.substr(i + 1, close - i - 1);
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    i = close + 1;
  }
  return out;
}

std::vector<std::string> StatementTemplate::variables() const {
  if (!predicate) return {proposition_var};
  return vars;
}

Statement StatementTemplate::instantiate(const Bindings& bindings) const {
  auto lookup = [&](const std::string& var) -> const std::string& {
    auto it = bindings.find(var);
    if (it == bindings.end()) throw BindingError("variable " + var + " is unbound");
    return it->second;
  };
  try {
    if (!predicate) return Statement::parse(lookup(proposition_var));
    std::vector<std::string> args;
    args.reserve(vars.size());
    for (const auto& v : vars) args.push_back(lookup(v));
    return Statement(*predicate, std::move(args));
  } catch (const ParseError& e) {
    throw BindingError(std::string("malformed proposition binding: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw BindingError(std::string("malformed binding: ") + e.what());
  }
}

const CriticalQuestion* SchemeDefinition::find_cq(std::string_view cq_id) const {
  for (const auto& cq : cqs) {
    if (cq.cq_id == cq_id) return &cq;
  }
  return nullptr;
}

std::optional<TermKind> SchemeDefinition::variable_kind(std::string_view var) const {
  for (const auto& v : variables) {
    if (v.name == var) return v.kind;
  }
  return std::nullopt;
}

namespace {

using K = TermKind;
using Target = CqTarget::Kind;

StatementTemplate atom(std::string text, Predicate p, std::vector<std::string> vars) {
  return {TextTemplate(std::move(text)), p, std::move(vars), {}};
}

StatementTemplate proposition(std::string text, std::string var) {
  return {TextTemplate(std::move(text)), std::nullopt, {}, std::move(var)};
}

CriticalQuestion cq(std::string id, std::string text, CqKind kind, CqTarget target) {
  return {std::move(id), TextTemplate(std::move(text)), kind, target};
}

constexpr CqTarget premise(std::size_t i) { return {Target::premise, i}; }
constexpr CqTarget applicability() { return {Target::applicability, 0}; }
constexpr CqTarget conclusion() { return {Target::conclusion, 0}; }

std::vector<SchemeDefinition> build_catalog() {
  std::vector<SchemeDefinition> out;

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::suspicion),
      "Suspicion through Address Control",
      true,
      {{"E", K::entity}, {"A", K::address}, {"O", K::offence}},
      {atom("Address {A} is connected to offence {O}", Predicate::connected, {"A", "O"}),
       atom("Entity {E} controls address {A}", Predicate::controls, {"E", "A"})},
      atom("Entity {E} is connected to offence {O}", Predicate::connected, {"E", "O"}),
      {cq("cq1", "Which circumstantial evidence indicates that entity {E} controls address {A}?",
          CqKind::assumption, premise(1)),
       cq("cq2",
          "Could it be that at the time of offence {O} someone else controlled address {A} instead of "
          "entity {E}?",
          CqKind::exception, premise(1)),
       cq("cq3", "How was address {A} connected to offence {O} that {E}'s involvement is indicated?",
          CqKind::supportive, premise(0)),
       cq("cq4", "Are there other indicators that {E} is connect to offence {O}?", CqKind::supportive,
          conclusion())},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::software),
      "Cluster from Software",
      true,
      {{"S", K::entity}, {"A1", K::address}, {"A2", K::address}, {"E", K::entity}},
      {atom("Software {S} establishes a link between address {A1} and address {A2}", Predicate::linked,
            {"S", "A1", "A2"}),
       atom("Software {S} is reliable", Predicate::reliable, {"S"}),
       atom("Entity {E} controls address {A1}", Predicate::controls, {"E", "A1"})},
      atom("Entity {E} controls address {A2}", Predicate::controls, {"E", "A2"}),
      {cq("cq1", "How does software {S} establish the link?", CqKind::exception, premise(0)),
       cq("cq2", "How reliable is software {S}? Why is software {S} considered reliable?",
          CqKind::assumption, premise(1)),
       cq("cq3",
          "Could this link be also established without the use of software {S}, e.g. by using a "
          "different software, human-reasoning with the multi-input heuristic, or other non-blackbox "
          "methods?",
          CqKind::exception, applicability()),
       cq("cq4", "What evidence exists for entity {E} controlling {A1}?", CqKind::assumption, premise(2)),
       cq("cq5", "Are there other indicators that {E} might control {A2}?", CqKind::supportive,
          conclusion())},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::multi_input),
      "Cluster from Multi-Input",
      true,
      {{"T", K::txid}, {"E", K::entity}, {"A", K::address}},
      {atom("Transaction {T} has multiple input addresses", Predicate::multi_input, {"T"}),
       atom("Entity {E} controls some input addresses of {T}", Predicate::controls, {"E", "A"})},
      atom("Entity {E} controls all input addresses of {T}", Predicate::controls_all_inputs, {"E", "T"}),
      {cq("cq1", "Could {T} be a CoinJoin transaction?", CqKind::exception, applicability()),
       cq("cq2",
          "Could it be that another entity F shares secret keys with {E} and thereby can control other "
          "or all inputs of {T}?",
          CqKind::exception, applicability()),
       cq("cq3",
          "Which input addresses of transaction {T} does entity {E} control? What evidence is there for "
          "{E} controlling these addresses?",
          CqKind::assumption, premise(1)),
       cq("cq4", "Are there other indicators that {E} might control other input addresses of {T}?",
          CqKind::supportive, conclusion())},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::change),
      "Cluster by Change-Address",
      true,
      {{"T", K::txid}, {"C", K::address}, {"E", K::entity}},
      {atom("Transaction {T} has multiple output addresses", Predicate::multi_output, {"T"}),
       atom("Output address {C} is a change address of transaction {T}", Predicate::is_change, {"T", "C"}),
       atom("Entity {E} controls all input addresses of {T}", Predicate::controls_all_inputs, {"E", "T"})},
      atom("Entity {E} also controls change address {C}", Predicate::controls, {"E", "C"}),
      {cq("cq1",
          "Could {T} just have multiple distinct benefactors? Could the change for example be donated to "
          "a supported unrelated entity?",
          CqKind::exception, premise(1)),
       cq("cq2",
          "What evidence is there suggesting that client software was used which generates a fresh "
          "change address for every new transaction?",
          CqKind::assumption, premise(1)),
       cq("cq3", "Are there other indicators that {E} controls address {C}?", CqKind::supportive,
          conclusion())},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::position_to_know),
      "Argument from Position to Know",
      false,
      {{"S", K::entity}, {"D", K::label}, {"P", K::proposition}},
      {atom("Source {S} is in position to know about things in a certain subject domain {D} containing "
            "proposition {P}.",
            Predicate::position_to_know, {"S", "D"}),
       atom("{S} asserts that {P} is true (false).", Predicate::asserts, {"S", "P"})},
      proposition("{P} is true (false).", "P"),
      {cq("cq1", "Is {S} in position to know whether {P} is true (false)?", CqKind::assumption, premise(0)),
       cq("cq2", "Is {S} an honest (trustworthy, reliable) source?", CqKind::exception, applicability()),
       cq("cq3", "Did {S} assert that {P} is true (false)?", CqKind::assumption, premise(1))},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::sign),
      "Argument from Sign",
      false,
      {{"O", K::proposition}, {"P", K::proposition}},
      {proposition("{O} (a finding) is true in this situation.", "O"),
       atom("{P} is generally indicated as true when its sign, {O}, is true.", Predicate::sign_of,
            {"O", "P"})},
      proposition("{P} is true in this situation.", "P"),
      {cq("cq1", "What is the strength of the correlation of the sign with the event signified?",
          CqKind::assumption, premise(1)),
       cq("cq2", "Are there other events that would more reliably account for the sign?", CqKind::exception,
          applicability())},
  });

  out.push_back(SchemeDefinition{
      std::string(scheme_ids::abduction),
      "Argument from Abductive Inference",
      false,
      {{"F", K::label}, {"E", K::proposition}},
      {atom("{F} is a finding or given set of facts.", Predicate::observed, {"F"}),
       atom("{E} is a satisfactory explanation of {F}.", Predicate::explains, {"E", "F"}),
       atom("No alternative explanation E' given so far is as satisfactory as {E}.",
            Predicate::best_explanation, {"E", "F"})},
      proposition("Therefore, {E} is plausible as hypothesis.", "E"),
      {cq("cq1",
          "How satisfactory is {E} as an explanation of {F}, apart from the alternative explanations "
          "available so far in the dialogue?",
          CqKind::assumption, premise(1)),
       cq("cq2", "How much better an explanation is {E} than the alternative explanations available so far in "
                 "the dialogue?",
          CqKind::assumption, premise(2)),
       cq("cq3",
          "How far has the dialogue progressed? If the dialogue is an inquiry, how thorough has the "
          "investigation of the case been?",
          CqKind::supportive, applicability()),
       cq("cq4", "Would it be better to continue the dialogue further, instead of drawing a conclusion at this "
                 "point?",
          CqKind::supportive, applicability())},
  });

  return out;
}

}  // namespace

const std::vector<SchemeDefinition>& catalog() {
  static const std::vector<SchemeDefinition> schemes = build_catalog();
  return schemes;
}

const SchemeDefinition& find_scheme(std::string_view scheme_id) {
  for (const auto& s : catalog()) {
    if (s.scheme_id == scheme_id) return s;
  }
  throw NotFoundError("unknown scheme " + std::string(scheme_id));
}

std::string_view to_string(CqKind kind) {
  switch (kind) {
    case CqKind::assumption:
      return "assumption";
    case CqKind::exception:
      return "exception";
    case CqKind::supportive:
      return "supportive";
  }
  return "?";
}

std::string to_string(const CqTarget& target) {
  switch (target.kind) {
    case CqTarget::Kind::premise:
      return "premise:" + std::to_string(target.premise);
    case CqTarget::Kind::applicability:
      return "applicability";
    case CqTarget::Kind::conclusion:
      return "conclusion";
  }
  return "?";
}

namespace {

json template_json(const StatementTemplate& t) {
  json j{{"text", t.text.plain()}};
  if (t.predicate) {
    j["predicate"] = std::string(info(*t.predicate).name);
    j["vars"] = t.vars;
  } else {
    j["proposition"] = t.proposition_var;
  }
  return j;
}

}  // namespace

json to_json(const SchemeDefinition& scheme) {
  json vars = json::array();
  for (const auto& v : scheme.variables) vars.push_back({{"name", v.name}, {"kind", to_string(v.kind)}});
  json premises = json::array();
  for (const auto& p : scheme.premises) premises.push_back(template_json(p));
  json cqs = json::array();
  for (const auto& q : scheme.cqs) {
    cqs.push_back({{"cq_id", q.cq_id},
                   {"text", q.text.plain()},
                   {"kind", to_string(q.kind)},
                   {"targets", to_string(q.target)}});
  }
  return {{"scheme_id", scheme.scheme_id},
          {"name", scheme.name},
          {"custom", scheme.custom},
          {"variables", vars},
          {"premises", premises},
          {"conclusion", template_json(scheme.conclusion)},
          {"cqs", cqs}};
}

json catalog_json() {
  json out = json::array();
  for (const auto& s : catalog()) out.push_back(to_json(s));
  return out;
}

}  // namespace chainarg
