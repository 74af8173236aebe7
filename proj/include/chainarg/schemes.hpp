#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chainarg/statement.hpp"

namespace chainarg {

// Variable name -> constant (or canonical statement text for proposition variables).
using Bindings = std::map<std::string, std::string>;

enum class CqKind { assumption, exception, supportive };

struct CqTarget {
  enum class Kind { premise, applicability, conclusion };
  Kind kind = Kind::applicability;
  std::size_t premise = 0;  // meaningful for Kind::premise only

  bool operator==(const CqTarget&) const = default;
};

// Text with `{Var}` placeholders. Removing the braces gives the scheme's
// published wording; substituting bindings gives the instantiated wording.
class TextTemplate {
 public:
  TextTemplate() = default;
  explicit TextTemplate(std::string raw) : raw_(std::move(raw)) {}

  const std::string& raw() const { return raw_; }
  std::string plain() const;
  std::string render(const Bindings& bindings) const;
  std::vector<std::string> variables() const;

 private:
  std::string raw_;
};

struct CriticalQuestion {
  std::string cq_id;
  TextTemplate text;
  CqKind kind = CqKind::assumption;
  CqTarget target;
};

// A premise or conclusion: either a predicate over scheme variables, or a
// bare proposition variable standing for a whole statement.
struct StatementTemplate {
  TextTemplate text;
  std::optional<Predicate> predicate;
  std::vector<std::string> vars;
  std::string proposition_var;  // set when `predicate` is empty

  std::vector<std::string> variables() const;
  // BindingError when a variable is unbound or its value is malformed.
  Statement instantiate(const Bindings& bindings) const;
};

struct VariableDecl {
  std::string name;
  TermKind kind;
};

struct SchemeDefinition {
  std::string scheme_id;
  std::string name;
  bool custom = false;  // one of the four blockchain-specific schemes
  std::vector<VariableDecl> variables;
  std::vector<StatementTemplate> premises;
  StatementTemplate conclusion;
  std::vector<CriticalQuestion> cqs;

  const CriticalQuestion* find_cq(std::string_view cq_id) const;
  std::optional<TermKind> variable_kind(std::string_view var) const;
};

namespace scheme_ids {
inline constexpr std::string_view suspicion = "suspicion-through-address-control";
inline constexpr std::string_view software = "cluster-from-software";
inline constexpr std::string_view multi_input = "cluster-from-multi-input";
inline constexpr std::string_view change = "cluster-by-change-address";
inline constexpr std::string_view position_to_know = "argument-from-position-to-know";
inline constexpr std::string_view sign = "argument-from-sign";
inline constexpr std::string_view abduction = "argument-from-abductive-inference";
}  // namespace scheme_ids

const std::vector<SchemeDefinition>& catalog();
// NotFoundError for unknown ids.
const SchemeDefinition& find_scheme(std::string_view scheme_id);

std::string_view to_string(CqKind kind);
std::string to_string(const CqTarget& target);

nlohmann::json to_json(const SchemeDefinition& scheme);
nlohmann::json catalog_json();

}  // namespace chainarg
