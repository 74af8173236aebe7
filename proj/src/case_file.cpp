#include "chainarg/case_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "chainarg/engine.hpp"
#include "chainarg/error.hpp"

namespace chainarg {

using nlohmann::json;

bool ChainSource::operator==(const ChainSource& other) const {
  if (path != other.path) return false;
  if (!transactions || !other.transactions) return !transactions && !other.transactions;
  return *transactions == *other.transactions;
}

const Entity* CaseFile::find_entity(std::string_view id) const {
  auto it = std::find_if(entities.begin(), entities.end(), [&](const Entity& e) { return e.id == id; });
  return it == entities.end() ? nullptr : &*it;
}

const Offence* CaseFile::find_offence(std::string_view id) const {
  auto it = std::find_if(offences.begin(), offences.end(), [&](const Offence& o) { return o.id == id; });
  return it == offences.end() ? nullptr : &*it;
}

const EvidenceItem* CaseFile::find_evidence(std::string_view id) const {
  auto it = std::find_if(evidence.begin(), evidence.end(),
                         [&](const EvidenceItem& e) { return e.evidence_id == id; });
  return it == evidence.end() ? nullptr : &*it;
}

const Argument* CaseFile::find_argument(std::string_view id) const {
  auto it = std::find_if(arguments.begin(), arguments.end(), [&](const Argument& a) { return a.arg_id == id; });
  return it == arguments.end() ? nullptr : &*it;
}

Argument* CaseFile::find_argument(std::string_view id) {
  auto it = std::find_if(arguments.begin(), arguments.end(), [&](const Argument& a) { return a.arg_id == id; });
  return it == arguments.end() ? nullptr : &*it;
}

bool CaseFile::operator==(const CaseFile& o) const {
  return case_id == o.case_id && title == o.title && chain == o.chain && heuristics == o.heuristics &&
         entities == o.entities && offences == o.offences && evidence == o.evidence &&
         arguments == o.arguments && cq_answers == o.cq_answers && attribution_tags == o.attribution_tags;
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::person:
      return "person";
    case EntityKind::service:
      return "service";
    case EntityKind::marketplace:
      return "marketplace";
    case EntityKind::software:
      return "software";
  }
  return "?";
}

std::string_view to_string(CqState state) {
  switch (state) {
    case CqState::open:
      return "open";
    case CqState::favourable:
      return "favourable";
    case CqState::unfavourable:
      return "unfavourable";
  }
  return "?";
}

std::optional<CqState> cq_state_from_string(std::string_view s) {
  if (s == "open") return CqState::open;
  if (s == "favourable") return CqState::favourable;
  if (s == "unfavourable") return CqState::unfavourable;
  return std::nullopt;
}

bool valid_argument_id(std::string_view id) {
  if (id.empty() || !std::islower(static_cast<unsigned char>(id.front()))) return false;
  if (id.starts_with("obj_")) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

namespace {

void check_term(const CaseFile& c, TermKind kind, const std::string& value, const std::string& where) {
  const auto* chain = c.transactions();
  auto known_address = [&] { return chain == nullptr || !chain->appearances(value).empty(); };
  switch (kind) {
    case TermKind::entity:
      if (c.find_entity(value) == nullptr) throw IntegrityError(where + ": unknown entity " + value);
      break;
    case TermKind::offence:
      if (c.find_offence(value) == nullptr) throw IntegrityError(where + ": unknown offence " + value);
      break;
    case TermKind::subject:
      if (c.find_entity(value) == nullptr && (chain == nullptr || chain->appearances(value).empty())) {
        throw IntegrityError(where + ": unknown entity or address " + value);
      }
      break;
    case TermKind::address:
      if (!known_address()) throw IntegrityError(where + ": unknown address " + value);
      break;
    case TermKind::txid:
      if (chain != nullptr && chain->find(value) == nullptr) {
        throw IntegrityError(where + ": unknown transaction " + value);
      }
      break;
    case TermKind::label:
    case TermKind::proposition:
      break;
  }
}

}  // namespace

void check_references(const CaseFile& c, const Statement& s, const std::string& where) {
  const auto& params = info(s.predicate()).params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == TermKind::proposition) {
      check_references(c, Statement::parse(s.arg(i)), where);
    } else {
      check_term(c, params[i], s.arg(i), where);
    }
  }
}

namespace {

void check_argument(const CaseFile& c, const Argument& a) {
  const auto where = "argument " + a.arg_id;
  const SchemeDefinition* scheme = nullptr;
  try {
    scheme = &find_scheme(a.scheme_id);
  } catch (const NotFoundError&) {
    throw IntegrityError(where + ": unknown scheme " + a.scheme_id);
  }

  for (const auto& v : scheme->variables) {
    if (!a.bindings.contains(v.name)) throw IntegrityError(where + ": variable " + v.name + " unbound");
  }
  for (const auto& [var, _] : a.bindings) {
    if (!scheme->variable_kind(var)) throw IntegrityError(where + ": binding for unknown variable " + var);
  }

  try {
    if (a.premises.size() != scheme->premises.size()) throw IntegrityError(where + ": premise count mismatch");
    for (std::size_t i = 0; i < a.premises.size(); ++i) {
      if (a.premises[i] != scheme->premises[i].instantiate(a.bindings)) {
        throw IntegrityError(where + ": premise " + std::to_string(i) + " does not match its template");
      }
    }
    if (a.conclusion != scheme->conclusion.instantiate(a.bindings)) {
      throw IntegrityError(where + ": conclusion does not match its template");
    }
  } catch (const BindingError& e) {
    throw IntegrityError(where + ": " + e.what());
  }
  for (const auto& p : a.premises) check_references(c, p, where);
  check_references(c, a.conclusion, where);
  try {
    check_chain_constraints(*scheme, a.bindings, c.transactions());
  } catch (const GroundingError& e) {
    throw IntegrityError(where + ": " + e.what());
  }

  if (a.premise_support.size() != a.premises.size()) {
    throw IntegrityError(where + ": every premise needs exactly one support entry");
  }
  for (std::size_t i = 0; i < a.premises.size(); ++i) {
    const auto& sup = a.premise_support[i];
    const Statement* source = nullptr;
    if (sup.kind == Support::Kind::evidence) {
      const auto* ev = c.find_evidence(sup.ref);
      if (ev == nullptr) throw IntegrityError(where + ": unknown evidence " + sup.ref);
      source = &ev->statement;
    } else {
      const auto* other = c.find_argument(sup.ref);
      if (other == nullptr) throw IntegrityError(where + ": unknown supporting argument " + sup.ref);
      source = &other->conclusion;
    }
    if (!entails(*source, a.premises[i], c.transactions())) {
      throw IntegrityError(where + ": " + sup.ref + " does not support premise " + std::to_string(i));
    }
  }

  for (const auto& q : scheme->cqs) {
    if (!a.cq_state.contains(q.cq_id)) throw IntegrityError(where + ": missing state for " + q.cq_id);
  }
  for (const auto& [cq_id, _] : a.cq_state) {
    if (scheme->find_cq(cq_id) == nullptr) throw IntegrityError(where + ": unknown critical question " + cq_id);
  }
}

}  // namespace

void check_case(const CaseFile& c) {
  if (c.case_id.empty() || !valid_constant(c.case_id)) throw IntegrityError("invalid case id '" + c.case_id + "'");

  std::set<std::string> ids;
  for (const auto& e : c.entities) {
    if (!valid_constant(e.id)) throw IntegrityError("invalid entity id '" + e.id + "'");
    if (!ids.insert(e.id).second) throw IntegrityError("duplicate entity or offence id " + e.id);
  }
  for (const auto& o : c.offences) {
    if (!valid_constant(o.id)) throw IntegrityError("invalid offence id '" + o.id + "'");
    if (!ids.insert(o.id).second) throw IntegrityError("duplicate entity or offence id " + o.id);
  }

  std::set<std::string> evidence_ids;
  for (const auto& e : c.evidence) {
    if (e.evidence_id.empty()) throw IntegrityError("evidence with empty id");
    if (!evidence_ids.insert(e.evidence_id).second) throw IntegrityError("duplicate evidence id " + e.evidence_id);
    check_references(c, e.statement, "evidence " + e.evidence_id);
    if (chain_fact(e.statement, c.transactions()) == false) {
      throw IntegrityError("evidence " + e.evidence_id + ": " + e.statement.to_string() +
                           " contradicts the transaction graph");
    }
  }

  std::set<std::string> arg_ids;
  for (const auto& a : c.arguments) {
    if (!valid_argument_id(a.arg_id)) throw IntegrityError("invalid argument id '" + a.arg_id + "'");
    if (!arg_ids.insert(a.arg_id).second) throw IntegrityError("duplicate argument id " + a.arg_id);
  }
  for (const auto& a : c.arguments) check_argument(c, a);

  // Support graph must be acyclic.
  std::map<std::string, int> color;  // 0 unvisited, 1 on stack, 2 done
  std::function<void(const Argument&)> visit = [&](const Argument& a) {
    color[a.arg_id] = 1;
    for (const auto& s : a.premise_support) {
      if (s.kind != Support::Kind::argument) continue;
      const int col = color[s.ref];
      if (col == 1) throw IntegrityError("support cycle through argument " + s.ref);
      if (col == 0) visit(*c.find_argument(s.ref));
    }
    color[a.arg_id] = 2;
  };
  for (const auto& a : c.arguments) {
    if (color[a.arg_id] == 0) visit(a);
  }

  std::uint64_t last_seq = 0;
  for (const auto& h : c.cq_answers) {
    if (h.seq <= last_seq) throw IntegrityError("answer history sequence numbers must increase");
    last_seq = h.seq;
  }

  for (const auto& t : c.attribution_tags) {
    if (c.find_entity(t.entity) == nullptr) throw IntegrityError("attribution tag: unknown entity " + t.entity);
    for (const auto& addr : t.addresses) check_term(c, TermKind::address, addr, "attribution tag");
  }
}

json to_json(const EvidenceItem& e) {
  return {{"evidence_id", e.evidence_id},
          {"statement", e.statement.to_string()},
          {"source", e.source},
          {"obtained_via", e.obtained_via}};
}

json to_json(const Argument& a) {
  json premises = json::array();
  for (const auto& p : a.premises) premises.push_back(p.to_string());
  json support = json::array();
  for (const auto& s : a.premise_support) {
    support.push_back({{s.kind == Support::Kind::evidence ? "evidence" : "argument", s.ref}});
  }
  json cqs = json::object();
  for (const auto& [id, st] : a.cq_state) {
    cqs[id] = {{"state", to_string(st.state)}, {"justification", st.justification}};
  }
  return {{"arg_id", a.arg_id},
          {"scheme_id", a.scheme_id},
          {"bindings", a.bindings},
          {"premises", premises},
          {"conclusion", a.conclusion.to_string()},
          {"premise_support", support},
          {"cq_state", cqs}};
}

json case_to_json(const CaseFile& c) {
  json doc;
  doc["format_version"] = kCaseFormatVersion;
  doc["case_id"] = c.case_id;
  doc["title"] = c.title;
  if (c.chain.path) {
    doc["chain"] = {{"path", *c.chain.path}};
  } else if (c.chain.transactions) {
    doc["chain"] = {{"embedded", chain_to_json(*c.chain.transactions)}};
  } else {
    doc["chain"] = nullptr;
  }
  doc["heuristics"] = to_json(c.heuristics);

  doc["entities"] = json::array();
  for (const auto& e : c.entities) {
    doc["entities"].push_back({{"id", e.id}, {"label", e.label}, {"kind", to_string(e.kind)}});
  }
  doc["offences"] = json::array();
  for (const auto& o : c.offences) doc["offences"].push_back({{"id", o.id}, {"label", o.label}});
  doc["evidence"] = json::array();
  for (const auto& e : c.evidence) doc["evidence"].push_back(to_json(e));
  doc["arguments"] = json::array();
  for (const auto& a : c.arguments) doc["arguments"].push_back(to_json(a));
  doc["cq_answers"] = json::array();
  for (const auto& h : c.cq_answers) {
    doc["cq_answers"].push_back({{"seq", h.seq},
                                 {"arg_id", h.arg_id},
                                 {"cq_id", h.cq_id},
                                 {"answer", to_string(h.answer)},
                                 {"justification", h.justification}});
  }
  doc["attribution_tags"] = json::array();
  for (const auto& t : c.attribution_tags) {
    doc["attribution_tags"].push_back({{"addresses", t.addresses}, {"entity", t.entity}, {"source", t.source}});
  }
  return doc;
}

namespace {

void only_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(where + ": unknown field '" + key + "'");
    }
  }
}

const json& field(const json& obj, std::string_view name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw SchemaError(where + ": missing field '" + std::string(name) + "'");
  return *it;
}

std::string str(const json& obj, std::string_view name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + std::string(name) + "' must be a string");
  return v.get<std::string>();
}

const json& arr(const json& obj, std::string_view name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_array()) throw SchemaError(where + ": field '" + std::string(name) + "' must be an array");
  return v;
}

Statement statement_field(const json& obj, std::string_view name, const std::string& where) {
  const auto text = str(obj, name, where);
  try {
    return Statement::parse(text);
  } catch (const ParseError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

EntityKind entity_kind(const std::string& s, const std::string& where) {
  for (auto k : {EntityKind::person, EntityKind::service, EntityKind::marketplace, EntityKind::software}) {
    if (to_string(k) == s) return k;
  }
  throw SchemaError(where + ": unknown entity kind '" + s + "'");
}

Argument argument_from_json(const json& j) {
  std::string where = "argument";
  only_fields(j, {"arg_id", "scheme_id", "bindings", "premises", "conclusion", "premise_support", "cq_state"}, where);
  Argument a;
  a.arg_id = str(j, "arg_id", where);
  where += " " + a.arg_id;
  a.scheme_id = str(j, "scheme_id", where);

  const auto& b = field(j, "bindings", where);
  if (!b.is_object()) throw SchemaError(where + ": bindings must be an object");
  for (const auto& [k, v] : b.items()) {
    if (!v.is_string()) throw SchemaError(where + ": binding " + k + " must be a string");
    a.bindings[k] = v.get<std::string>();
  }

  for (const auto& p : arr(j, "premises", where)) {
    if (!p.is_string()) throw SchemaError(where + ": premises must be strings");
    try {
      a.premises.push_back(Statement::parse(p.get<std::string>()));
    } catch (const ParseError& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  a.conclusion = statement_field(j, "conclusion", where);

  for (const auto& s : arr(j, "premise_support", where)) {
    if (!s.is_object() || s.size() != 1) throw SchemaError(where + ": malformed premise_support entry");
    const auto& [kind, ref] = *s.items().begin();
    if (!ref.is_string()) throw SchemaError(where + ": support reference must be a string");
    if (kind == "evidence") {
      a.premise_support.push_back({Support::Kind::evidence, ref.get<std::string>()});
    } else if (kind == "argument") {
      a.premise_support.push_back({Support::Kind::argument, ref.get<std::string>()});
    } else {
      throw SchemaError(where + ": support kind must be 'evidence' or 'argument'");
    }
  }

  const auto& cqs = field(j, "cq_state", where);
  if (!cqs.is_object()) throw SchemaError(where + ": cq_state must be an object");
  for (const auto& [id, st] : cqs.items()) {
    const auto cq_where = where + " " + id;
    only_fields(st, {"state", "justification"}, cq_where);
    auto state = cq_state_from_string(str(st, "state", cq_where));
    if (!state) throw SchemaError(cq_where + ": unknown state");
    a.cq_state[id] = {*state, str(st, "justification", cq_where)};
  }
  return a;
}

}  // namespace

CaseFile case_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw SchemaError("case file must be a JSON object");
  auto fv = doc.find("format_version");
  if (fv == doc.end() || !fv->is_number_integer()) {
    throw VersionError("case file has no integer format_version", 0);
  }
  if (fv->get<int>() != kCaseFormatVersion) {
    throw VersionError("unsupported case format_version " + std::to_string(fv->get<int>()) + " (expected " +
                           std::to_string(kCaseFormatVersion) + ")",
                       fv->get<int>());
  }

  const std::string where = "case file";
  only_fields(doc,
              {"format_version", "case_id", "title", "chain", "heuristics", "entities", "offences", "evidence",
               "arguments", "cq_answers", "attribution_tags"},
              where);

  CaseFile c;
  c.case_id = str(doc, "case_id", where);
  if (doc.contains("title")) c.title = str(doc, "title", where);

  if (auto ch = doc.find("chain"); ch != doc.end() && !ch->is_null()) {
    only_fields(*ch, {"path", "embedded"}, "chain");
    if (ch->contains("path") == ch->contains("embedded")) {
      throw SchemaError("chain: exactly one of 'path' or 'embedded' is required");
    }
    if (ch->contains("path")) {
      c.chain.path = str(*ch, "path", "chain");
      c.chain.transactions =
          std::make_shared<const TransactionSet>(parse_chain_file(read_file(base_dir / *c.chain.path)));
    } else {
      c.chain.transactions = std::make_shared<const TransactionSet>(chain_from_json((*ch)["embedded"]));
    }
  }

  if (doc.contains("heuristics")) c.heuristics = heuristic_params_from_json(doc["heuristics"]);

  if (doc.contains("entities")) {
    for (const auto& e : arr(doc, "entities", where)) {
      only_fields(e, {"id", "label", "kind"}, "entity");
      const auto id = str(e, "id", "entity");
      c.entities.push_back({id, str(e, "label", "entity " + id), entity_kind(str(e, "kind", "entity " + id), id)});
    }
  }
  if (doc.contains("offences")) {
    for (const auto& o : arr(doc, "offences", where)) {
      only_fields(o, {"id", "label"}, "offence");
      const auto id = str(o, "id", "offence");
      c.offences.push_back({id, str(o, "label", "offence " + id)});
    }
  }
  if (doc.contains("evidence")) {
    for (const auto& e : arr(doc, "evidence", where)) {
      only_fields(e, {"evidence_id", "statement", "source", "obtained_via"}, "evidence");
      const auto id = str(e, "evidence_id", "evidence");
      const auto ew = "evidence " + id;
      c.evidence.push_back({id, statement_field(e, "statement", ew), str(e, "source", ew), str(e, "obtained_via", ew)});
    }
  }
  if (doc.contains("arguments")) {
    for (const auto& a : arr(doc, "arguments", where)) c.arguments.push_back(argument_from_json(a));
  }
  if (doc.contains("cq_answers")) {
    for (const auto& h : arr(doc, "cq_answers", where)) {
      only_fields(h, {"seq", "arg_id", "cq_id", "answer", "justification"}, "cq answer");
      const auto& seq = field(h, "seq", "cq answer");
      if (!seq.is_number_unsigned()) throw SchemaError("cq answer: seq must be a non-negative integer");
      auto answer = cq_state_from_string(str(h, "answer", "cq answer"));
      if (!answer || *answer == CqState::open) throw SchemaError("cq answer: answer must be favourable or unfavourable");
      c.cq_answers.push_back({seq.get<std::uint64_t>(), str(h, "arg_id", "cq answer"), str(h, "cq_id", "cq answer"),
                              *answer, str(h, "justification", "cq answer")});
    }
  }
  if (doc.contains("attribution_tags")) {
    for (const auto& t : arr(doc, "attribution_tags", where)) {
      only_fields(t, {"addresses", "entity", "source"}, "attribution tag");
      AttributionTag tag;
      for (const auto& a : arr(t, "addresses", "attribution tag")) {
        if (!a.is_string()) throw SchemaError("attribution tag: addresses must be strings");
        tag.addresses.push_back(a.get<std::string>());
      }
      tag.entity = str(t, "entity", "attribution tag");
      tag.source = str(t, "source", "attribution tag");
      c.attribution_tags.push_back(std::move(tag));
    }
  }

  check_case(c);
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LookupError("cannot write " + tmp.string());
    out << content;
    if (!out) throw LookupError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CaseFile load_case(const std::filesystem::path& path) {
  const auto raw = read_file(path);
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(raw, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("malformed case file JSON", line, column);
  }
  return case_from_json(doc, path.parent_path());
}

void save_case(const CaseFile& c, const std::filesystem::path& path) {
  write_file(path, case_to_json(c).dump(2) + "\n");
}

}  // namespace chainarg
