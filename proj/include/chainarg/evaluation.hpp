#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chainarg/case_file.hpp"
#include "chainarg/framework.hpp"
#include "chainarg/statement.hpp"

namespace chainarg {

struct FrameworkOptions {
  // Unanswered assumption CQs attack their argument until answered favourably.
  bool open_assumptions_attack = true;
};

// Nodes: every argument in case order, then one objection node per attacking
// CQ (id obj_<arg>_<cq>). Attacks are added rule by rule (rebut, undermine,
// cq-assumption, cq-exception) and each one is extended to every argument
// that transitively rests on the attacked argument.
ArgumentationFramework build_framework(const CaseFile& c, const FrameworkOptions& options = {});

// IN if some argument concluding `s` is IN; OUT if at least one concludes it
// and all of them are OUT; UNDEC otherwise.
Label statement_status(const CaseFile& c, const ArgumentationFramework& af, const Labelling& lab,
                       const Statement& s);

struct StatementStatus {
  Statement statement;
  Label status = Label::undec;
  std::vector<std::string> concluded_by;
};

struct Evaluation {
  ArgumentationFramework af;
  Labelling labelling;
  // Every argued statement, in order of first conclusion.
  std::vector<StatementStatus> statuses;

  Label label_of(std::string_view node_id) const;
  const StatementStatus* status_of(const Statement& s) const;
};

// Grounded semantics.
Evaluation evaluate(const CaseFile& c, const FrameworkOptions& options = {});

nlohmann::json to_json(const Evaluation& e);

}  // namespace chainarg
