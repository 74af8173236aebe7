#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainarg {

// Closed predicate vocabulary. Every statement an argument, an evidence item
// or a report talks about is built from these.
enum class Predicate {
  controls,             // controls(entity, address)
  linked,               // linked(software, address, address)
  connected,            // connected(entity|address, offence)
  is_change,            // is_change(txid, address)
  reliable,             // reliable(source)
  position_to_know,     // position_to_know(source, domain)
  sign_of,              // sign_of(proposition, proposition)
  explains,             // explains(proposition, findings)
  multi_input,          // multi_input(txid)
  multi_output,         // multi_output(txid)
  controls_all_inputs,  // controls_all_inputs(entity, txid)
  observed,             // observed(finding)
  asserts,              // asserts(source, proposition)
  best_explanation,     // best_explanation(proposition, findings)
};

// What a predicate argument denotes; used for referential checks.
enum class TermKind {
  entity,
  offence,
  subject,  // entity or address
  address,
  txid,
  label,  // free identifier (finding, domain)
  proposition,
};

struct PredicateInfo {
  Predicate predicate;
  std::string_view name;
  std::vector<TermKind> params;
};

std::span<const PredicateInfo> predicates();
const PredicateInfo& info(Predicate p);
std::optional<Predicate> predicate_from_name(std::string_view name);
std::string_view to_string(TermKind kind);

// A ground atom over the vocabulary, possibly negated. Proposition-typed
// arguments hold the canonical text of a nested statement.
class Statement {
 public:
  Statement() = default;
  // std::invalid_argument on arity or constant-syntax violations.
  Statement(Predicate predicate, std::vector<std::string> args, bool negated = false);

  // Text form: `pred(a,b)` or `!pred(a,b)`; whitespace around tokens ignored.
  // Throws ParseError.
  static Statement parse(std::string_view text);

  Predicate predicate() const { return predicate_; }
  const std::vector<std::string>& args() const { return args_; }
  const std::string& arg(std::size_t i) const { return args_.at(i); }
  bool negated() const { return negated_; }

  Statement negation() const;
  bool contrary_to(const Statement& other) const;
  std::string to_string() const;

  auto operator<=>(const Statement&) const = default;

 private:
  Predicate predicate_ = Predicate::observed;
  std::vector<std::string> args_{"_"};
  bool negated_ = false;
};

// Constants may not be empty or contain whitespace, commas, parentheses or a
// leading '!'.
bool valid_constant(std::string_view s);

}  // namespace chainarg
