// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "chainarg/case_file.hpp"
#include "chainarg/engine.hpp"
#include "chainarg/evaluation.hpp"
#include "chainarg/framework.hpp"
#include "chainarg/heuristics.hpp"
#include "chainarg/schemes.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace chainarg;

namespace {

// A function rather than a global: parsing needs the predicate table to be initialized.
Statement final_statement() { return Statement::parse("connected(X,WSM-administration)"); }

struct Check {
  std::string name;
  std::function<std::string()> body;  // empty string means pass
};

std::string wsm_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  auto c = testing::load_wsm();
  testing::answer_all(c, CqState::favourable);
  const auto e = evaluate(c);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const auto* st = e.status_of(final_statement());
  if (st == nullptr || st->status != Label::in) return "final statement not IN";
  // The chain must run through every stage of the reconstruction.
  for (const char* id : {"a_pgp", "a_susp", "a_flow_w1", "a_mi", "a_ptk_bppc", "a_ptk_game", "a_sw", "a_final"}) {
    if (e.label_of(id) != Label::in) return std::string(id) + " not IN";
  }
  if (elapsed >= std::chrono::seconds(1)) return "took longer than 1 s";
  return "";
}

std::string defeat_propagation() {
  auto c = testing::load_wsm();
  testing::answer_all(c, CqState::favourable);
  answer_cq(c, "a_mi", "cq1", CqState::unfavourable, "equal-output pattern found");
  const auto e = evaluate(c);
  if (e.label_of("a_mi") != Label::out) return "multi-input argument not OUT";
  if (e.label_of("a_sw") != Label::out) return "software-link argument not OUT";
  if (e.status_of(final_statement())->status == Label::in) return "final statement still IN";
  return "";
}

std::string clustering_oracle() {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 100; ++round) {
    const auto ts = oracle::random_chain(rng, 200, 500);
    HeuristicParams on;
    HeuristicParams off;
    off.apply_coinjoin_filter = false;
    const auto p_on = multi_input_cluster(ts, on);
    const auto p_off = multi_input_cluster(ts, off);
    if (oracle::as_sets(p_on) != oracle::clusters(ts, on)) return "filter-on mismatch in round " + std::to_string(round);
    if (oracle::as_sets(p_off) != oracle::clusters(ts, off)) return "filter-off mismatch in round " + std::to_string(round);
    if (!p_on.refines(p_off)) return "filter-on partition is not a refinement in round " + std::to_string(round);
  }
  return "";
}

std::string grounded_oracle() {
  std::mt19937_64 rng(424242);
  for (int round = 0; round < 200; ++round) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    const auto edges = oracle::random_edges(rng, n);
    const auto af = ArgumentationFramework::from_edges(n, edges);
    const auto g = grounded_labelling(af);
    const auto minimal = oracle::in_minimal(oracle::legal_labellings(n, edges));
    if (minimal.size() != 1 || minimal.front() != g) return "mismatch in round " + std::to_string(round);
    if (!is_legal(af, g)) return "illegal labelling in round " + std::to_string(round);
  }
  return "";
}

std::string catalog_fidelity() {
  int checked = 0;
  for (const auto& s : catalog()) {
    if (!s.custom) continue;
    std::ostringstream text;
    for (const auto& p : s.premises) text << "premise: " << p.text.plain() << "\n";
    text << "conclusion: " << s.conclusion.text.plain() << "\n";
    for (const auto& q : s.cqs) text << q.cq_id << ": " << q.text.plain() << "\n";
    if (text.str() != read_file(testing::golden_dir() / (s.scheme_id + ".txt"))) return s.scheme_id + " differs";
    ++checked;
  }
  return checked == 4 ? "" : "expected 4 custom schemes";
}

std::string round_trip() {
  std::mt19937_64 rng(31337);
  testing::TempDir dir;
  for (int round = 0; round < 50; ++round) {
    auto c = testing::load_wsm();
    auto cqs = list_cqs(c, false);
    std::shuffle(cqs.begin(), cqs.end(), rng);
    const auto n = std::uniform_int_distribution<std::size_t>(0, cqs.size())(rng);
    for (std::size_t i = 0; i < n; ++i) {
      answer_cq(c, cqs[i].arg_id, cqs[i].cq_id,
                std::bernoulli_distribution(0.5)(rng) ? CqState::favourable : CqState::unfavourable,
                "round " + std::to_string(round));
    }
    c.title = "round " + std::to_string(round);
    c.heuristics.coinjoin_min_inputs = std::uniform_int_distribution<int>(2, 6)(rng);
    c.chain.path.reset();  // embed the chain
    const auto path = dir / "rt.case.json";
    save_case(c, path);
    if (!(load_case(path) == c)) return "case mismatch in round " + std::to_string(round);
  }
  for (int round = 0; round < 50; ++round) {
    const auto ts = oracle::random_chain(rng, 200, 500);
    if (!(parse_chain_file(serialize_chain(ts)) == ts)) return "chain mismatch in round " + std::to_string(round);
  }
  return "";
}

std::string validation() {
  using testing::coinbase;
  using testing::spend;
  // Clean five-transaction chain.
  const TransactionSet good({coinbase("cb0", "a", 1000), coinbase("cb1", "b", 500),
                             spend("t1", {{"cb0", 0}}, {{"c", 600}, {"d", 390}}),
                             spend("t2", {{"cb1", 0}, {"t1", 1}}, {{"e", 880}}), spend("t3", {{"t2", 0}}, {{"f", 870}})});
  const auto g = validate_set(good);
  if (!g.valid() || !g.conserved()) return "clean chain flagged or not conserved";
  // Same shape, but t2 overspends and t3 spends t1:1 a second time.
  const TransactionSet bad({coinbase("cb0", "a", 1000), coinbase("cb1", "b", 500),
                            spend("t1", {{"cb0", 0}}, {{"c", 600}, {"d", 390}}),
                            spend("t2", {{"cb1", 0}, {"t1", 1}}, {{"e", 900}}), spend("t3", {{"t1", 1}}, {{"f", 10}})});
  const auto b = validate_set(bad);
  if (b.findings.size() != 2) return "expected exactly 2 findings";
  const auto t2 = b.findings_for("t2");
  const auto t3 = b.findings_for("t3");
  if (t2.size() != 1 || t2[0].kind != FindingKind::negative_fee) return "negative fee not flagged on t2 alone";
  if (t3.size() != 1 || t3[0].kind != FindingKind::double_spend) return "double spend not flagged on t3 alone";
  return "";
}

}  // namespace

int main() {
  const std::vector<Check> checks{
      {"WSM fixture end-to-end (all CQs favourable, final statement IN, < 1 s)", wsm_end_to_end},
      {"Defeat propagation (CoinJoin CQ unfavourable on the mixer link)", defeat_propagation},
      {"Clustering oracle equivalence (100 random chains, filter refinement)", clustering_oracle},
      {"Grounded-semantics oracle equivalence (200 random AFs)", grounded_oracle},
      {"Catalog fidelity (golden texts of the four custom schemes)", catalog_fidelity},
      {"Case-file and chain-file round trip (50 mutated cases)", round_trip},
      {"Validation (conservation and double spend on 5-tx chains)", validation},
  };
  int failed = 0;
  for (const auto& check : checks) {
    std::string problem;
    try {
      problem = check.body();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (problem.empty()) {
      std::cout << "PASS  " << check.name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL  " << check.name << ": " << problem << "\n";
    }
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
