#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "chainarg/case_file.hpp"
#include "chainarg/chain.hpp"
#include "chainarg/engine.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return CHAINARG_FIXTURE_DIR; }
inline fs::path golden_dir() { return CHAINARG_GOLDEN_DIR; }
inline fs::path wsm_case_path() { return fixture_dir() / "wsm" / "wsm.case.json"; }

inline chainarg::CaseFile load_wsm() { return chainarg::load_case(wsm_case_path()); }

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "chainarg-test-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline chainarg::Transaction coinbase(std::string txid, std::string address, chainarg::Satoshi value) {
  return {std::move(txid), true, {}, {{std::move(address), value}}};
}

inline chainarg::Transaction spend(std::string txid, std::vector<std::pair<std::string, std::uint32_t>> inputs,
                                   std::vector<std::pair<std::string, chainarg::Satoshi>> outputs) {
  chainarg::Transaction tx{std::move(txid), false, {}, {}};
  for (auto& [t, v] : inputs) tx.inputs.push_back({t, v});
  for (auto& [a, v] : outputs) tx.outputs.push_back({a, v});
  return tx;
}

// Copies the WSM fixture (case and chain) into `dir`.
inline fs::path copy_wsm(const fs::path& dir) {
  for (const char* f : {"wsm.case.json", "wsm.chain.json"}) {
    fs::copy_file(fixture_dir() / "wsm" / f, dir / f, fs::copy_options::overwrite_existing);
  }
  return dir / "wsm.case.json";
}

// Two coinbases co-spent by tx_ab, which pays a reused address and a fresh change address.
inline chainarg::CaseFile mini_case() {
  return chainarg::case_from_json(nlohmann::json::parse(R"JSON({
    "format_version": 1,
    "case_id": "mini",
    "title": "Mini case",
    "chain": {"embedded": {"transactions": [
      {"txid": "cb_a", "coinbase": true, "inputs": [], "outputs": [{"address": "a", "value_sat": 1000}]},
      {"txid": "cb_b", "coinbase": true, "inputs": [], "outputs": [{"address": "b", "value_sat": 1000}]},
      {"txid": "cb_p", "coinbase": true, "inputs": [], "outputs": [{"address": "pay", "value_sat": 1000}]},
      {"txid": "tx_ab", "coinbase": false, "inputs": [{"txid": "cb_a", "vout": 0}, {"txid": "cb_b", "vout": 0}],
       "outputs": [{"address": "pay", "value_sat": 1500}, {"address": "chg", "value_sat": 400}]}
    ]}},
    "entities": [
      {"id": "E", "label": "Suspect", "kind": "person"},
      {"id": "F", "label": "Other person", "kind": "person"},
      {"id": "tool", "label": "Linking tool", "kind": "software"}
    ],
    "offences": [{"id": "O", "label": "Offence"}],
    "evidence": [
      {"evidence_id": "ev_a", "statement": "controls(E,a)", "source": "seizure", "obtained_via": "wallet file"},
      {"evidence_id": "ev_ao", "statement": "connected(a,O)", "source": "seizure", "obtained_via": "payout log"},
      {"evidence_id": "ev_link", "statement": "linked(tool,chg,pay)", "source": "tool run", "obtained_via": "report"},
      {"evidence_id": "ev_rel", "statement": "reliable(tool)", "source": "validation", "obtained_via": "benchmark"}
    ]
  })JSON"));
}

inline void answer_all(chainarg::CaseFile& c, chainarg::CqState answer) {
  for (const auto& q : chainarg::list_cqs(c, false)) chainarg::answer_cq(c, q.arg_id, q.cq_id, answer, "test");
}

}  // namespace testing
