#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chainarg {

enum class AttackReason { rebut, undermine, cq_assumption, cq_exception };

struct Node {
  enum class Kind { argument, objection };
  std::string id;
  Kind kind = Kind::argument;
  std::string arg_id;  // objections: the argument questioned
  std::string cq_id;   // objections only

  bool operator==(const Node&) const = default;
};

struct Attack {
  std::size_t attacker;
  std::size_t target;
  AttackReason reason;

  bool operator==(const Attack&) const = default;
};

// A Dung framework over dense node indexes.
class ArgumentationFramework {
 public:
  // Returns the index of the new node; std::invalid_argument on a duplicate id.
  std::size_t add_node(Node node);
  // False when the pair is already present (the first reason is kept).
  // std::out_of_range on a bad index.
  bool add_attack(std::size_t attacker, std::size_t target, AttackReason reason);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Attack>& attacks() const { return attacks_; }
  std::size_t size() const { return nodes_.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  const std::vector<std::size_t>& attackers_of(std::size_t node) const { return attackers_.at(node); }
  const std::vector<std::size_t>& targets_of(std::size_t node) const { return targets_.at(node); }
  bool attacks(std::size_t attacker, std::size_t target) const;

  // Plain graph for tests and external input; node ids are "a0", "a1", ...
  static ArgumentationFramework from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  bool operator==(const ArgumentationFramework& other) const {
    return nodes_ == other.nodes_ && attacks_ == other.attacks_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Attack> attacks_;
  std::vector<std::vector<std::size_t>> attackers_;
  std::vector<std::vector<std::size_t>> targets_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class Label { in, out, undec };
using Labelling = std::vector<Label>;

std::string_view to_string(AttackReason r);
std::string_view to_string(Label l);

// IN iff every attacker is OUT; OUT iff some attacker is IN; UNDEC otherwise.
bool is_legal(const ArgumentationFramework& af, const Labelling& lab);

Labelling grounded_labelling(const ArgumentationFramework& af);

inline constexpr std::size_t kMaxCompleteNodes = 20;
// Every complete labelling in lexicographic order (in < out < undec by node).
// SizeGuardError above kMaxCompleteNodes nodes.
std::vector<Labelling> complete_labellings(const ArgumentationFramework& af);

// `arg(x).` and `att(x,y).` lines.
std::string to_apx(const ArgumentationFramework& af);
nlohmann::json to_json(const ArgumentationFramework& af);
nlohmann::json to_json(const ArgumentationFramework& af, const Labelling& lab);

}  // namespace chainarg
