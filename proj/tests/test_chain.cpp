#include <doctest.h>

#include <random>

#include "chainarg/chain.hpp"
#include "chainarg/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace chainarg;
using testing::coinbase;
using testing::spend;

namespace {

const std::string kOneCoinbase = R"({"transactions": [
  {"txid": "cb", "coinbase": true, "inputs": [], "outputs": [{"address": "a1", "value_sat": 5000000000}]}
]})";

}  // namespace

TEST_CASE("smallest chain indexes its single output") {
  const auto ts = parse_chain_file(kOneCoinbase);
  CHECK(ts.size() == 1);
  const auto& apps = ts.appearances("a1");
  REQUIRE(apps.size() == 1);
  CHECK(apps[0] == Appearance{"cb", Role::output, 0});
  CHECK(ts.addresses() == std::vector<std::string>{"a1"});
  CHECK(ts.first_seen("a1") == 0u);
  CHECK(ts.appearances("nobody").empty());
}

TEST_CASE("out-of-range vout is a schema error naming the spender") {
  const std::string raw = R"({"transactions": [
    {"txid": "A", "coinbase": true, "inputs": [], "outputs": [
      {"address": "x", "value_sat": 1}, {"address": "y", "value_sat": 2}]},
    {"txid": "B", "coinbase": false, "inputs": [{"txid": "A", "vout": 5}], "outputs": [
      {"address": "z", "value_sat": 1}]}
  ]})";
  try {
    parse_chain_file(raw);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("transaction B") != std::string::npos);
  }
}

TEST_CASE("malformed JSON reports line and column") {
  const std::string raw = "{\n  \"transactions\": [\n    {,\n  ]\n}";
  try {
    parse_chain_file(raw);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 6);
  }
}

TEST_CASE("schema violations name the field") {
  CHECK_THROWS_AS(parse_chain_file(R"({"transactions": [{"txid": "t", "coinbase": true, "inputs": [],
                    "outputs": [{"address": "a", "value_sat": -1}]}]})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_chain_file(R"({"transactions": [{"txid": "t", "inputs": [], "outputs": []}]})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_chain_file(R"({"transactions": [{"txid": "t", "coinbase": true, "inputs": [],
                    "outputs": [{"address": "a", "value_sat": 1}], "extra": 1}]})"),
                  SchemaError);
  CHECK_THROWS_AS(TransactionSet({coinbase("t", "a", 1), coinbase("t", "b", 1)}), SchemaError);
  try {
    parse_chain_file(R"({"transactions": [{"txid": "t", "coinbase": true, "inputs": []}]})");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("outputs") != std::string::npos);
  }
}

TEST_CASE("fee is inputs minus outputs") {
  const TransactionSet ts({coinbase("cb", "a", 100'000'000),
                           spend("t1", {{"cb", 0}}, {{"b", 70'000'000}, {"c", 29'000'000}})});
  const auto r = validate_set(ts);
  CHECK(r.valid());
  REQUIRE(r.fees.size() == 1);
  CHECK(r.fees[0].txid == "t1");
  CHECK(r.fees[0].fee == 1'000'000);
  CHECK(r.conserved());
}

TEST_CASE("hand-built five-transaction chain flags exactly what was constructed") {
  // cb0 -> t1 (ok), t2 overspends cb1, t3 double-spends t1:0, t4 spends a missing tx.
  const TransactionSet ts({
      coinbase("cb0", "a", 1000),
      coinbase("cb1", "b", 500),
      spend("t1", {{"cb0", 0}}, {{"c", 900}}),
      spend("t2", {{"cb1", 0}}, {{"d", 600}}),
      spend("t3", {{"cb0", 0}}, {{"e", 10}}),
  });
  const auto r = validate_set(ts);
  CHECK_FALSE(r.valid());
  REQUIRE(r.findings.size() == 2);
  CHECK(r.findings_for("t1").empty());
  REQUIRE(r.findings_for("t2").size() == 1);
  CHECK(r.findings_for("t2")[0].kind == FindingKind::negative_fee);
  REQUIRE(r.findings_for("t3").size() == 1);
  CHECK(r.findings_for("t3")[0].kind == FindingKind::double_spend);

  const TransactionSet dangling({coinbase("cb0", "a", 10), spend("t1", {{"ghost", 0}}, {{"b", 1}})});
  const auto d = validate_set(dangling);
  REQUIRE(d.findings.size() == 1);
  CHECK(d.findings[0].kind == FindingKind::dangling_outpoint);
  CHECK(d.findings[0].txid == "t1");
}

TEST_CASE("resolve_input") {
  const TransactionSet ts({{"txA", true, {}, {{"a1", 50}, {"a2", 7}}}});
  CHECK(resolve_input(ts, {"txA", 0}) == TxOutput{"a1", 50});
  CHECK_THROWS_AS(resolve_input(ts, {"txA", 7}), LookupError);
  CHECK_THROWS_AS(resolve_input(ts, {"nope", 0}), LookupError);
}

TEST_CASE("WSM chain is self-contained and conserves value") {
  const auto ts = parse_chain_file(read_file(testing::fixture_dir() / "wsm" / "wsm.chain.json"));
  const auto r = validate_set(ts);
  CHECK(r.valid());
  CHECK(r.conserved());
  for (const auto& tx : ts.transactions()) {
    for (const auto& in : tx.inputs) CHECK_NOTHROW(resolve_input(ts, in));
  }
  CHECK(ts.find("tx_w2_w1") != nullptr);
  CHECK(ts.find("tx_w2_w4") != nullptr);
}

TEST_CASE("line_column") {
  CHECK(line_column("ab\ncd", 0) == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(line_column("ab\ncd", 4) == std::pair<std::size_t, std::size_t>{2, 2});
}

TEST_CASE("random chains: round trip, conservation and index consistency") {
  std::mt19937_64 rng(20240611);
  for (int round = 0; round < 60; ++round) {
    const auto ts = oracle::random_chain(rng, 200, 500);
    CAPTURE(round);

    const auto again = parse_chain_file(serialize_chain(ts));
    CHECK(again == ts);
    CHECK(serialize_chain(again) == serialize_chain(ts));

    const auto r = validate_set(ts);
    CHECK(r.valid());
    CHECK(r.conserved());

    // Rescan and compare against the index in both directions.
    std::map<std::string, std::vector<Appearance>> expected;
    for (const auto& tx : ts.transactions()) {
      for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
        expected[resolve_input(ts, tx.inputs[i]).address].push_back({tx.txid, Role::input, i});
      }
      for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
        expected[tx.outputs[i].address].push_back({tx.txid, Role::output, i});
      }
    }
    std::vector<std::string> keys;
    for (const auto& [addr, apps] : expected) {
      keys.push_back(addr);
      auto got = ts.appearances(addr);
      auto want = apps;
      auto key = [](const Appearance& a) { return std::tuple(a.txid, a.role, a.index); };
      auto less = [&](const Appearance& x, const Appearance& y) { return key(x) < key(y); };
      std::sort(got.begin(), got.end(), less);
      std::sort(want.begin(), want.end(), less);
      CHECK(got == want);
    }
    CHECK(ts.addresses() == keys);
  }
}
