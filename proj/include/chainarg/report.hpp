#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainarg/case_file.hpp"
#include "chainarg/engine.hpp"
#include "chainarg/evaluation.hpp"
#include "chainarg/heuristics.hpp"

namespace chainarg {

enum class Tier { corroborated, presumptive, contested, defeated };

std::string_view to_string(Tier t);

// IN with no open CQ anywhere on the supporting chain is corroborated, IN
// otherwise presumptive; UNDEC contested; OUT defeated.
Tier tier_for(Label status, std::size_t open_cqs_on_chain);

struct ChainStep {
  std::string arg_id;
  std::string scheme_id;
  std::string scheme_name;
  Statement conclusion;
  Label label = Label::undec;
  std::vector<Support> support;
  std::vector<CqEntry> cqs;
};

struct Objection {
  std::string attacker;  // node id
  std::string target;    // argument id
  AttackReason reason = AttackReason::rebut;
  Label label = Label::undec;
  std::string cq_text;  // objection nodes only
  std::string justification;
};

struct ReportEntry {
  Statement statement;
  Label status = Label::undec;
  Tier tier = Tier::contested;
  // Supporting arguments first, the concluding argument last.
  std::vector<ChainStep> chain;
  std::size_t open_cqs = 0;
  // Attackers of chain arguments that are not OUT.
  std::vector<Objection> objections;
};

struct ReportCluster {
  std::size_t cluster_id = 0;
  std::vector<std::string> addresses;
  std::vector<ClusterMerge> merges;
  // Entities named by attribution tags covering any of the addresses.
  std::vector<std::string> attributed_to;
};

struct SuspicionReport {
  std::string case_id;
  std::string title;
  std::vector<ReportEntry> entries;
  std::vector<CqEntry> open_cqs;
  // Non-singleton clusters under the case's heuristic parameters.
  std::vector<ReportCluster> clusters;
};

SuspicionReport generate_report(const CaseFile& c, const Evaluation& e);
SuspicionReport generate_report(const CaseFile& c);

std::string render_markdown(const SuspicionReport& r);
nlohmann::json to_json(const SuspicionReport& r);

}  // namespace chainarg
