#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chainarg/chain.hpp"
#include "chainarg/heuristics.hpp"
#include "chainarg/schemes.hpp"
#include "chainarg/statement.hpp"

namespace chainarg {

inline constexpr int kCaseFormatVersion = 1;

enum class EntityKind { person, service, marketplace, software };

struct Entity {
  std::string id;
  std::string label;
  EntityKind kind = EntityKind::person;

  bool operator==(const Entity&) const = default;
};

struct Offence {
  std::string id;
  std::string label;

  bool operator==(const Offence&) const = default;
};

struct EvidenceItem {
  std::string evidence_id;
  Statement statement;
  std::string source;
  std::string obtained_via;

  bool operator==(const EvidenceItem&) const = default;
};

enum class CqState { open, favourable, unfavourable };

struct CqStatus {
  CqState state = CqState::open;
  std::string justification;

  bool operator==(const CqStatus&) const = default;
};

struct Support {
  enum class Kind { evidence, argument };
  Kind kind = Kind::evidence;
  std::string ref;

  bool operator==(const Support&) const = default;
};

struct Argument {
  std::string arg_id;
  std::string scheme_id;
  Bindings bindings;
  std::vector<Statement> premises;
  Statement conclusion;
  std::vector<Support> premise_support;
  std::map<std::string, CqStatus> cq_state;

  bool operator==(const Argument&) const = default;
};

struct CqAnswer {
  std::uint64_t seq = 0;
  std::string arg_id;
  std::string cq_id;
  CqState answer = CqState::favourable;
  std::string justification;

  bool operator==(const CqAnswer&) const = default;
};

struct AttributionTag {
  std::vector<std::string> addresses;
  std::string entity;
  std::string source;

  bool operator==(const AttributionTag&) const = default;
};

struct ChainSource {
  // Set when the chain lives in a separate file (relative to the case file).
  std::optional<std::string> path;
  std::shared_ptr<const TransactionSet> transactions;

  bool operator==(const ChainSource& other) const;
};

struct CaseFile {
  std::string case_id;
  std::string title;
  ChainSource chain;
  HeuristicParams heuristics;
  std::vector<Entity> entities;
  std::vector<Offence> offences;
  std::vector<EvidenceItem> evidence;
  std::vector<Argument> arguments;
  std::vector<CqAnswer> cq_answers;
  std::vector<AttributionTag> attribution_tags;

  // In-memory only; bumped by every engine mutation.
  std::uint64_t revision = 0;

  const TransactionSet* transactions() const { return chain.transactions.get(); }
  const Entity* find_entity(std::string_view id) const;
  const Offence* find_offence(std::string_view id) const;
  const EvidenceItem* find_evidence(std::string_view id) const;
  const Argument* find_argument(std::string_view id) const;
  Argument* find_argument(std::string_view id);

  // Semantic equality; `revision` is ignored.
  bool operator==(const CaseFile& other) const;
};

std::string_view to_string(EntityKind kind);
std::string_view to_string(CqState state);
std::optional<CqState> cq_state_from_string(std::string_view s);

// `[a-z][a-z0-9_]*`, not starting with the objection-node prefix "obj_".
bool valid_argument_id(std::string_view id);

// Referential integrity and well-formedness: unique ids, existing references,
// arguments equal to their scheme templates under their bindings, acyclic
// support. Throws IntegrityError naming the offending id.
void check_case(const CaseFile& c);
// Entity, offence, address and txid arguments of `s` must exist in the case.
void check_references(const CaseFile& c, const Statement& s, const std::string& where);

nlohmann::json case_to_json(const CaseFile& c);
// `base_dir` resolves a path-referenced chain. Throws VersionError,
// SchemaError or IntegrityError.
CaseFile case_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

CaseFile load_case(const std::filesystem::path& path);
void save_case(const CaseFile& c, const std::filesystem::path& path);

nlohmann::json to_json(const Argument& a);
nlohmann::json to_json(const EvidenceItem& e);

// Reads a whole file; LookupError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace chainarg
