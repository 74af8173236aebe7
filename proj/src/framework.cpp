#include "chainarg/framework.hpp"

#include <algorithm>
#include <stdexcept>

#include "chainarg/error.hpp"

namespace chainarg {

using nlohmann::json;

std::size_t ArgumentationFramework::add_node(Node node) {
  if (index_.contains(node.id)) throw std::invalid_argument("duplicate node id " + node.id);
  const auto i = nodes_.size();
  index_.emplace(node.id, i);
  nodes_.push_back(std::move(node));
  attackers_.emplace_back();
  targets_.emplace_back();
  return i;
}

bool ArgumentationFramework::add_attack(std::size_t attacker, std::size_t target, AttackReason reason) {
  if (attacker >= nodes_.size() || target >= nodes_.size()) throw std::out_of_range("attack endpoint out of range");
  if (attacks(attacker, target)) return false;
  attacks_.push_back({attacker, target, reason});
  attackers_[target].push_back(attacker);
  targets_[attacker].push_back(target);
  return true;
}

std::optional<std::size_t> ArgumentationFramework::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool ArgumentationFramework::attacks(std::size_t attacker, std::size_t target) const {
  const auto& t = targets_.at(attacker);
  return std::find(t.begin(), t.end(), target) != t.end();
}

ArgumentationFramework ArgumentationFramework::from_edges(std::size_t n,
                                                          const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  ArgumentationFramework af;
  for (std::size_t i = 0; i < n; ++i) af.add_node({"a" + std::to_string(i), Node::Kind::argument, {}, {}});
  for (const auto& [from, to] : edges) af.add_attack(from, to, AttackReason::rebut);
  return af;
}

std::string_view to_string(AttackReason r) {
  switch (r) {
    case AttackReason::rebut:
      return "rebut";
    case AttackReason::undermine:
      return "undermine";
    case AttackReason::cq_assumption:
      return "cq-assumption";
    case AttackReason::cq_exception:
      return "cq-exception";
  }
  return "?";
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::in:
      return "IN";
    case Label::out:
      return "OUT";
    case Label::undec:
      return "UNDEC";
  }
  return "?";
}

bool is_legal(const ArgumentationFramework& af, const Labelling& lab) {
  if (lab.size() != af.size()) return false;
  for (std::size_t i = 0; i < af.size(); ++i) {
    const auto& att = af.attackers_of(i);
    const bool all_out = std::all_of(att.begin(), att.end(), [&](std::size_t a) { return lab[a] == Label::out; });
    const bool some_in = std::any_of(att.begin(), att.end(), [&](std::size_t a) { return lab[a] == Label::in; });
    const Label expected = all_out ? Label::in : some_in ? Label::out : Label::undec;
    if (lab[i] != expected) return false;
  }
  return true;
}

Labelling grounded_labelling(const ArgumentationFramework& af) {
  const auto n = af.size();
  Labelling lab(n, Label::undec);
  std::vector<bool> done(n, false);
  std::vector<std::size_t> live(n);  // attackers not yet OUT
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    live[i] = af.attackers_of(i).size();
    if (live[i] == 0) work.push_back(i);
  }

  while (!work.empty()) {
    const auto x = work.back();
    work.pop_back();
    if (done[x]) continue;
    done[x] = true;
    lab[x] = Label::in;
    for (auto t : af.targets_of(x)) {
      if (done[t]) continue;
      done[t] = true;
      lab[t] = Label::out;
      for (auto u : af.targets_of(t)) {
        if (--live[u] == 0 && !done[u]) work.push_back(u);
      }
    }
  }
  return lab;
}

std::vector<Labelling> complete_labellings(const ArgumentationFramework& af) {
  const auto n = af.size();
  if (n > kMaxCompleteNodes) {
    throw SizeGuardError("complete labellings are enumerated for at most " + std::to_string(kMaxCompleteNodes) +
                         " nodes, framework has " + std::to_string(n));
  }

  // ready[i]: nodes whose own label and all attacker labels are fixed once node i is.
  std::vector<std::vector<std::size_t>> ready(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t r = j;
    for (auto a : af.attackers_of(j)) r = std::max(r, a);
    ready[r].push_back(j);
  }

  auto node_ok = [&](const Labelling& lab, std::size_t j) {
    const auto& att = af.attackers_of(j);
    const bool all_out = std::all_of(att.begin(), att.end(), [&](std::size_t a) { return lab[a] == Label::out; });
    const bool some_in = std::any_of(att.begin(), att.end(), [&](std::size_t a) { return lab[a] == Label::in; });
    return lab[j] == (all_out ? Label::in : some_in ? Label::out : Label::undec);
  };

  std::vector<Labelling> out;
  Labelling lab(n, Label::undec);
  std::function<void(std::size_t)> extend = [&](std::size_t i) {
    if (i == n) {
      out.push_back(lab);
      return;
    }
    for (Label l : {Label::in, Label::out, Label::undec}) {
      lab[i] = l;
      bool ok = true;
      // Early conflicts with already labelled neighbours.
      for (auto a : af.attackers_of(i)) {
        if (a < i && l == Label::in && lab[a] != Label::out) ok = false;
        if (a < i && lab[a] == Label::in && l != Label::out) ok = false;
      }
      for (auto t : af.targets_of(i)) {
        if (t < i && l == Label::in && lab[t] != Label::out) ok = false;
      }
      for (auto j : ready[i]) {
        if (ok && !node_ok(lab, j)) ok = false;
      }
      if (ok) extend(i + 1);
    }
    lab[i] = Label::undec;
  };
  extend(0);
  return out;
}

std::string to_apx(const ArgumentationFramework& af) {
  std::string out;
  for (const auto& node : af.nodes()) out += "arg(" + node.id + ").\n";
  for (const auto& a : af.attacks()) {
    out += "att(" + af.nodes()[a.attacker].id + "," + af.nodes()[a.target].id + ").\n";
  }
  return out;
}

json to_json(const ArgumentationFramework& af) {
  json nodes = json::array();
  for (const auto& n : af.nodes()) {
    json j = {{"id", n.id}, {"kind", n.kind == Node::Kind::argument ? "argument" : "objection"}};
    if (n.kind == Node::Kind::objection) {
      j["arg_id"] = n.arg_id;
      j["cq_id"] = n.cq_id;
    }
    nodes.push_back(std::move(j));
  }
  json attacks = json::array();
  for (const auto& a : af.attacks()) {
    attacks.push_back(
        {{"attacker", af.nodes()[a.attacker].id}, {"target", af.nodes()[a.target].id}, {"reason", to_string(a.reason)}});
  }
  return {{"nodes", nodes}, {"attacks", attacks}};
}

json to_json(const ArgumentationFramework& af, const Labelling& lab) {
  json out = json::object();
  for (std::size_t i = 0; i < af.size(); ++i) out[af.nodes()[i].id] = to_string(lab.at(i));
  return out;
}

}  // namespace chainarg
