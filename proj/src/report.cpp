#include "chainarg/report.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "chainarg/schemes.hpp"

namespace chainarg {

using nlohmann::json;

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::corroborated:
      return "corroborated";
    case Tier::presumptive:
      return "presumptive";
    case Tier::contested:
      return "contested";
    case Tier::defeated:
      return "defeated";
  }
  return "?";
}

Tier tier_for(Label status, std::size_t open_cqs_on_chain) {
  switch (status) {
    case Label::in:
      return open_cqs_on_chain == 0 ? Tier::corroborated : Tier::presumptive;
    case Label::undec:
      return Tier::contested;
    case Label::out:
      return Tier::defeated;
  }
  return Tier::contested;
}

namespace {

// Post-order over argument supports: supporting arguments precede what they support.
std::vector<const Argument*> chain_of(const CaseFile& c, const Argument& top) {
  std::vector<const Argument*> out;
  std::set<std::string> seen;
  std::function<void(const Argument&)> visit = [&](const Argument& a) {
    if (!seen.insert(a.arg_id).second) return;
    for (const auto& s : a.premise_support) {
      if (s.kind != Support::Kind::argument) continue;
      if (const auto* sub = c.find_argument(s.ref)) visit(*sub);
    }
    out.push_back(&a);
  };
  visit(top);
  return out;
}

std::size_t open_count(const std::vector<const Argument*>& chain) {
  std::size_t n = 0;
  for (const auto* a : chain) {
    for (const auto& [_, st] : a->cq_state) n += st.state == CqState::open ? 1 : 0;
  }
  return n;
}

std::vector<CqEntry> cqs_of(const Argument& a) {
  std::vector<CqEntry> out;
  for (const auto& q : find_scheme(a.scheme_id).cqs) {
    const auto& st = a.cq_state.at(q.cq_id);
    out.push_back({a.arg_id, q.cq_id, q.kind, st.state, q.text.render(a.bindings), st.justification});
  }
  return out;
}

ReportEntry entry_for(const CaseFile& c, const Evaluation& e, const StatementStatus& st) {
  ReportEntry r;
  r.statement = st.statement;
  r.status = st.status;

  std::vector<const Argument*> best;
  std::size_t best_open = 0;
  for (const auto& id : st.concluded_by) {
    if (st.status == Label::in && e.label_of(id) != Label::in) continue;
    const auto chain = chain_of(c, *c.find_argument(id));
    const auto open = open_count(chain);
    if (best.empty() || open < best_open) {
      best = chain;
      best_open = open;
    }
  }
  r.open_cqs = best_open;
  r.tier = tier_for(st.status, best_open);

  std::set<std::string> listed;
  for (const auto* a : best) {
    const auto& scheme = find_scheme(a->scheme_id);
    r.chain.push_back({a->arg_id, a->scheme_id, scheme.name, a->conclusion, e.label_of(a->arg_id),
                       a->premise_support, cqs_of(*a)});

    const auto idx = *e.af.index_of(a->arg_id);
    for (auto att : e.af.attackers_of(idx)) {
      if (e.labelling[att] == Label::out) continue;
      const auto& node = e.af.nodes()[att];
      if (!listed.insert(node.id).second) continue;
      Objection o;
      o.attacker = node.id;
      o.target = a->arg_id;
      for (const auto& at : e.af.attacks()) {
        if (at.attacker == att && at.target == idx) o.reason = at.reason;
      }
      o.label = e.labelling[att];
      if (node.kind == Node::Kind::objection) {
        const auto* q = c.find_argument(node.arg_id);
        o.target = node.arg_id;
        o.cq_text = find_scheme(q->scheme_id).find_cq(node.cq_id)->text.render(q->bindings);
        o.justification = q->cq_state.at(node.cq_id).justification;
      }
      r.objections.push_back(std::move(o));
    }
  }
  return r;
}

}  // namespace

SuspicionReport generate_report(const CaseFile& c, const Evaluation& e) {
  SuspicionReport r;
  r.case_id = c.case_id;
  r.title = c.title;
  for (const auto& st : e.statuses) r.entries.push_back(entry_for(c, e, st));
  r.open_cqs = list_open_cqs(c);

  if (const auto* chain = c.transactions()) {
    const auto partition = multi_input_cluster(*chain, c.heuristics);
    for (std::size_t i = 0; i < partition.clusters().size(); ++i) {
      const auto& addrs = partition.clusters()[i];
      if (addrs.size() < 2) continue;
      ReportCluster rc{i, addrs, partition.merges_in(i), {}};
      for (const auto& tag : c.attribution_tags) {
        const bool covers = std::any_of(tag.addresses.begin(), tag.addresses.end(),
                                        [&](const std::string& a) { return partition.contains(a) && partition.cluster_id(a) == i; });
        if (covers && std::find(rc.attributed_to.begin(), rc.attributed_to.end(), tag.entity) == rc.attributed_to.end()) {
          rc.attributed_to.push_back(tag.entity);
        }
      }
      r.clusters.push_back(std::move(rc));
    }
  }
  return r;
}

SuspicionReport generate_report(const CaseFile& c) { return generate_report(c, evaluate(c)); }

namespace {

std::string support_text(const std::vector<Support>& support) {
  std::string out;
  for (const auto& s : support) {
    if (!out.empty()) out += ", ";
    out += (s.kind == Support::Kind::evidence ? "evidence `" : "argument `") + s.ref + "`";
  }
  return out;
}

std::string cq_line(const CqEntry& q) {
  std::string out = q.cq_id + " (" + std::string(to_string(q.kind)) + ", " + std::string(to_string(q.state)) + "): " + q.text;
  if (!q.justification.empty()) out += " Answer: " + q.justification;
  return out;
}

}  // namespace

std::string render_markdown(const SuspicionReport& r) {
  std::ostringstream md;
  md << "# Suspicion report: " << (r.title.empty() ? r.case_id : r.title) << "\n\n";
  md << "Case `" << r.case_id << "`, grounded semantics.\n\n";

  if (r.entries.empty()) {
    md << "No arguments in this case.\n\n";
  } else {
    md << "| Statement | Status | Tier | Open CQs on chain |\n|---|---|---|---|\n";
    for (const auto& e : r.entries) {
      md << "| " << e.statement.to_string() << " | " << to_string(e.status) << " | " << to_string(e.tier) << " | "
         << e.open_cqs << " |\n";
    }
    md << "\n";
  }

  for (const auto& e : r.entries) {
    md << "## " << e.statement.to_string() << "\n\n";
    md << "Status " << to_string(e.status) << ", tier " << to_string(e.tier) << ".\n\n";
    md << "Chain:\n\n";
    for (std::size_t i = 0; i < e.chain.size(); ++i) {
      const auto& s = e.chain[i];
      md << i + 1 << ". `" << s.arg_id << "` " << s.scheme_name << ": " << s.conclusion.to_string() << " ["
         << to_string(s.label) << "]\n";
      md << "   - support: " << support_text(s.support) << "\n";
      for (const auto& q : s.cqs) md << "   - " << cq_line(q) << "\n";
    }
    md << "\n";
    if (!e.objections.empty()) {
      md << "Objections:\n\n";
      for (const auto& o : e.objections) {
        md << "- `" << o.attacker << "` (" << to_string(o.reason) << ", " << to_string(o.label) << ") against `"
           << o.target << "`";
        if (!o.cq_text.empty()) md << ": " << o.cq_text;
        if (!o.justification.empty()) md << " Answer: " << o.justification;
        md << "\n";
      }
      md << "\n";
    }
  }

  md << "## Open critical questions\n\n";
  if (r.open_cqs.empty()) md << "None.\n";
  for (const auto& q : r.open_cqs) {
    md << "- `" << q.arg_id << "` " << q.cq_id << " (" << to_string(q.kind) << "): " << q.text << "\n";
  }
  md << "\n## Clusters\n\n";
  if (r.clusters.empty()) md << "No multi-address clusters.\n";
  for (const auto& cl : r.clusters) {
    md << "- cluster " << cl.cluster_id << ": ";
    for (std::size_t i = 0; i < cl.addresses.size(); ++i) md << (i ? ", " : "") << cl.addresses[i];
    md << "\n";
    for (const auto& m : cl.merges) md << "  - " << m.left << " + " << m.right << " via " << m.txid << "\n";
    if (!cl.attributed_to.empty()) {
      md << "  - attributed to:";
      for (const auto& ent : cl.attributed_to) md << " " << ent;
      md << "\n";
    }
  }
  return md.str();
}

namespace {

json cq_json(const CqEntry& q) {
  return {{"arg_id", q.arg_id},
          {"cq_id", q.cq_id},
          {"kind", to_string(q.kind)},
          {"state", to_string(q.state)},
          {"text", q.text},
          {"justification", q.justification}};
}

}  // namespace

json to_json(const SuspicionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json chain = json::array();
    for (const auto& s : e.chain) {
      json support = json::array();
      for (const auto& sup : s.support) {
        support.push_back({{sup.kind == Support::Kind::evidence ? "evidence" : "argument", sup.ref}});
      }
      json cqs = json::array();
      for (const auto& q : s.cqs) cqs.push_back(cq_json(q));
      chain.push_back({{"arg_id", s.arg_id},
                       {"scheme_id", s.scheme_id},
                       {"scheme_name", s.scheme_name},
                       {"conclusion", s.conclusion.to_string()},
                       {"label", to_string(s.label)},
                       {"premise_support", support},
                       {"cqs", cqs}});
    }
    json objections = json::array();
    for (const auto& o : e.objections) {
      objections.push_back({{"attacker", o.attacker},
                            {"target", o.target},
                            {"reason", to_string(o.reason)},
                            {"label", to_string(o.label)},
                            {"cq_text", o.cq_text},
                            {"justification", o.justification}});
    }
    entries.push_back({{"statement", e.statement.to_string()},
                       {"status", to_string(e.status)},
                       {"tier", to_string(e.tier)},
                       {"open_cqs", e.open_cqs},
                       {"chain", chain},
                       {"objections", objections}});
  }
  json open = json::array();
  for (const auto& q : r.open_cqs) open.push_back(cq_json(q));
  json clusters = json::array();
  for (const auto& cl : r.clusters) {
    json merges = json::array();
    for (const auto& m : cl.merges) merges.push_back({{"txid", m.txid}, {"left", m.left}, {"right", m.right}});
    clusters.push_back(
        {{"cluster_id", cl.cluster_id}, {"addresses", cl.addresses}, {"merges", merges}, {"attributed_to", cl.attributed_to}});
  }
  return {{"case_id", r.case_id},
          {"title", r.title},
          {"semantics", "grounded"},
          {"entries", entries},
          {"open_cqs", open},
          {"clusters", clusters}};
}

}  // namespace chainarg
