#include "chainarg/statement.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include "chainarg/error.hpp"

namespace chainarg {

namespace {

using K = TermKind;

const std::array<PredicateInfo, 14> kPredicates{{
    {Predicate::controls, "controls", {K::entity, K::address}},
    {Predicate::linked, "linked", {K::entity, K::address, K::address}},
    {Predicate::connected, "connected", {K::subject, K::offence}},
    {Predicate::is_change, "is_change", {K::txid, K::address}},
    {Predicate::reliable, "reliable", {K::entity}},
    {Predicate::position_to_know, "position_to_know", {K::entity, K::label}},
    {Predicate::sign_of, "sign_of", {K::proposition, K::proposition}},
    {Predicate::explains, "explains", {K::proposition, K::label}},
    {Predicate::multi_input, "multi_input", {K::txid}},
    {Predicate::multi_output, "multi_output", {K::txid}},
    {Predicate::controls_all_inputs, "controls_all_inputs", {K::entity, K::txid}},
    {Predicate::observed, "observed", {K::label}},
    {Predicate::asserts, "asserts", {K::entity, K::proposition}},
    {Predicate::best_explanation, "best_explanation", {K::proposition, K::label}},
}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Statement parse_all() {
    auto s = parse_statement();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("invalid statement '" + std::string(text_) + "': " + what, 1, pos_ + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  Statement parse_statement() {
    skip_space();
    bool negated = false;
    if (pos_ < text_.size() && text_[pos_] == '!') {
      negated = true;
      ++pos_;
      skip_space();
    }
    const auto name_start = pos_;
    while (pos_ < text_.size() && (std::islower(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const auto name = text_.substr(name_start, pos_ - name_start);
    const auto pred = predicate_from_name(name);
    if (!pred) {
      pos_ = name_start;
      fail("unknown predicate '" + std::string(name) + "'");
    }
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '('");
    ++pos_;

    const auto& params = info(*pred).params;
    std::vector<std::string> args;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i > 0) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != ',') fail("expected ','");
        ++pos_;
      }
      if (params[i] == TermKind::proposition) {
        args.push_back(parse_statement().to_string());
      } else {
        skip_space();
        const auto start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') ++pos_;
        const auto constant = trim(text_.substr(start, pos_ - start));
        if (!valid_constant(constant)) {
          pos_ = start;
          fail("invalid constant '" + std::string(constant) + "'");
        }
        args.emplace_back(constant);
      }
    }
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')' after " + std::to_string(params.size()) + " arguments");
    ++pos_;
    return Statement(*pred, std::move(args), negated);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::span<const PredicateInfo> predicates() { return kPredicates; }

const PredicateInfo& info(Predicate p) {
  for (const auto& i : kPredicates) {
    if (i.predicate == p) return i;
  }
  throw std::logic_error("unknown predicate");
}

std::optional<Predicate> predicate_from_name(std::string_view name) {
  for (const auto& i : kPredicates) {
    if (i.name == name) return i.predicate;
  }
  return std::nullopt;
}

std::string_view to_string(TermKind kind) {
  switch (kind) {
    case TermKind::entity:
      return "entity";
    case TermKind::offence:
      return "offence";
    case TermKind::subject:
      return "subject";
    case TermKind::address:
      return "address";
    case TermKind::txid:
      return "txid";
    case TermKind::label:
      return "label";
    case TermKind::proposition:
      return "proposition";
  }
  return "?";
}

bool valid_constant(std::string_view s) {
  if (s.empty() || s.front() == '!') return false;
  return std::none_of(s.begin(), s.end(),
                      [](char c) { return c == ',' || c == '(' || c == ')' || is_space(c); });
}

Statement::Statement(Predicate predicate, std::vector<std::string> args, bool negated)
    : predicate_(predicate), args_(std::move(args)), negated_(negated) {
  const auto& params = info(predicate_).params;
  if (args_.size() != params.size()) {
    throw std::invalid_argument(std::string(info(predicate_).name) + " takes " +
                                std::to_string(params.size()) + " arguments, got " +
                                std::to_string(args_.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == TermKind::proposition) {
      args_[i] = parse(args_[i]).to_string();
    } else if (!valid_constant(args_[i])) {
      throw std::invalid_argument("invalid constant '" + args_[i] + "'");
    }
  }
}

Statement Statement::parse(std::string_view text) { return Parser(text).parse_all(); }

Statement Statement::negation() const {
  Statement s = *this;
  s.negated_ = !negated_;
  return s;
}

bool Statement::contrary_to(const Statement& other) const {
  return predicate_ == other.predicate_ && args_ == other.args_ && negated_ != other.negated_;
}

std::string Statement::to_string() const {
  std::string out = negated_ ? "!" : "";
  out += info(predicate_).name;
  out += '(';
  for (std::size_t i = 0; i < args_.size(); ++i) {
    if (i > 0) out += ',';
    out += args_[i];
  }
  out += ')';
  return out;
}

}  // namespace chainarg
