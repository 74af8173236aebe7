#include <doctest.h>

#include <random>

#include "chainarg/report.hpp"
#include "chainarg/error.hpp"
#include "support.hpp"

using namespace chainarg;

namespace {

// A function rather than a global: parsing needs the predicate table to be initialized.
Statement final_statement() { return Statement::parse("connected(X,WSM-administration)"); }

const ReportEntry& entry(const SuspicionReport& r, const Statement& s) {
  for (const auto& e : r.entries) {
    if (e.statement == s) return e;
  }
  throw std::runtime_error("no report entry for " + s.to_string());
}

}  // namespace

TEST_CASE("tier rule") {
  CHECK(tier_for(Label::in, 0) == Tier::corroborated);
  CHECK(tier_for(Label::in, 3) == Tier::presumptive);
  CHECK(tier_for(Label::undec, 0) == Tier::contested);
  CHECK(tier_for(Label::out, 0) == Tier::defeated);
}

TEST_CASE("fully answered unattacked argument is corroborated") {
  auto c = testing::mini_case();
  instantiate(c, scheme_ids::suspicion, {{"E", "E"}, {"A", "a"}, {"O", "O"}});
  testing::answer_all(c, CqState::favourable);
  const auto r = generate_report(c);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].tier == Tier::corroborated);
  CHECK(r.entries[0].objections.empty());
  CHECK(r.open_cqs.empty());
}

TEST_CASE("WSM with open exception questions is presumptive") {
  const auto c = testing::load_wsm();
  const auto r = generate_report(c);
  const auto& e = entry(r, final_statement());
  CHECK(e.status == Label::in);
  CHECK(e.tier == Tier::presumptive);
  CHECK(e.open_cqs > 0);
  // Supports precede the arguments they support; the final argument is last.
  REQUIRE_FALSE(e.chain.empty());
  CHECK(e.chain.back().arg_id == "a_final");
  std::vector<std::string> ids;
  for (const auto& s : e.chain) ids.push_back(s.arg_id);
  auto pos = [&](const std::string& id) { return std::find(ids.begin(), ids.end(), id) - ids.begin(); };
  CHECK(pos("a_mi") < pos("a_sw"));
  CHECK(pos("a_ptk_bppc") < pos("a_mi"));
  CHECK(pos("a_pgp") < pos("a_susp"));
  CHECK(pos("a_susp") < pos("a_flow_w1"));
  CHECK(pos("a_sw") < pos("a_final"));
}

TEST_CASE("defeated multi-input argument cites the CoinJoin objection") {
  auto c = testing::load_wsm();
  answer_cq(c, "a_mi", "cq1", CqState::unfavourable, "equal-output pattern found");
  const auto r = generate_report(c);
  const auto& mi = entry(r, Statement::parse("controls_all_inputs(X,tx_mixlink)"));
  CHECK(mi.tier == Tier::defeated);
  const auto& fin = entry(r, final_statement());
  CHECK(fin.tier == Tier::defeated);
  bool cited = false;
  for (const auto& o : fin.objections) {
    if (o.attacker == "obj_a_mi_cq1") {
      cited = true;
      CHECK(o.reason == AttackReason::cq_exception);
      CHECK(o.cq_text == "Could tx_mixlink be a CoinJoin transaction?");
      CHECK(o.justification == "equal-output pattern found");
    }
  }
  CHECK(cited);
  const auto md = render_markdown(r);
  CHECK(md.find("obj_a_mi_cq1") != std::string::npos);
  CHECK(md.find("equal-output pattern found") != std::string::npos);
}

TEST_CASE("tiers are a pure function of labelling and CQ state") {
  std::mt19937_64 rng(5150);
  for (int round = 0; round < 25; ++round) {
    CAPTURE(round);
    auto c = testing::load_wsm();
    auto cqs = list_cqs(c, false);
    std::shuffle(cqs.begin(), cqs.end(), rng);
    const auto n = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    for (std::size_t i = 0; i < n && i < cqs.size(); ++i) {
      const auto state = std::bernoulli_distribution(0.7)(rng) ? CqState::favourable : CqState::unfavourable;
      answer_cq(c, cqs[i].arg_id, cqs[i].cq_id, state, "random");
    }
    const auto e = evaluate(c);
    const auto r = generate_report(c, e);
    REQUIRE(r.entries.size() == e.statuses.size());
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& re = r.entries[i];
      CHECK(re.statement == e.statuses[i].statement);
      CHECK(re.status == e.statuses[i].status);
      std::size_t open = 0;
      for (const auto& step : re.chain) {
        CHECK(step.label == e.label_of(step.arg_id));
        const auto* a = c.find_argument(step.arg_id);
        for (const auto& [_, s] : a->cq_state) open += s.state == CqState::open ? 1 : 0;
      }
      CHECK(re.open_cqs == open);
      CHECK(re.tier == tier_for(re.status, open));
      for (const auto& o : re.objections) CHECK(o.label != Label::out);
    }
    // Same inputs, same report.
    CHECK(to_json(generate_report(c)) == to_json(r));
  }
}

TEST_CASE("markdown lists every open CQ text verbatim") {
  const auto c = testing::load_wsm();
  const auto md = render_markdown(generate_report(c));
  const auto open = list_open_cqs(c);
  REQUIRE_FALSE(open.empty());
  for (const auto& q : open) CHECK_MESSAGE(md.find(q.text) != std::string::npos, q.text);
  CHECK(md.find("## Clusters") != std::string::npos);
  CHECK(md.find("via tx_mixer_payout") != std::string::npos);
}

TEST_CASE("report JSON shape") {
  const auto j = to_json(generate_report(testing::load_wsm()));
  CHECK(j["case_id"] == "wsm");
  CHECK(j["semantics"] == "grounded");
  REQUIRE(j["entries"].is_array());
  CHECK(j["entries"][0].contains("tier"));
  CHECK(j["clusters"].is_array());
}
