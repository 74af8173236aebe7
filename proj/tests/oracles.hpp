#pragma once

// Brute-force reference implementations and seeded generators used to check
// the production algorithms.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainarg/chain.hpp"
#include "chainarg/framework.hpp"
#include "chainarg/heuristics.hpp"

namespace oracle {

using chainarg::Label;
using chainarg::Labelling;
using chainarg::Satoshi;
using chainarg::Transaction;
using chainarg::TransactionSet;

// Coinjoin rule restated: enough inputs and some output value repeated enough.
inline bool coinjoin(const Transaction& tx, int min_inputs, int min_equal) {
  if (tx.is_coinbase || static_cast<int>(tx.inputs.size()) < min_inputs) return false;
  std::map<Satoshi, int> counts;
  for (const auto& o : tx.outputs) ++counts[o.value];
  return std::any_of(counts.begin(), counts.end(), [&](const auto& kv) { return kv.second >= min_equal; });
}

// Partition by repeated merging of any two sets linked by a co-spending pair.
inline std::set<std::set<std::string>> clusters(const TransactionSet& ts, const chainarg::HeuristicParams& p) {
  std::vector<std::set<std::string>> sets;
  for (const auto& a : ts.addresses()) sets.push_back({a});

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& tx : ts.transactions()) {
    if (tx.is_coinbase) continue;
    if (p.apply_coinjoin_filter && coinjoin(tx, p.coinjoin_min_inputs, p.coinjoin_min_equal_outputs)) continue;
    std::vector<std::string> in;
    for (const auto& op : tx.inputs) {
      if (const auto* o = ts.try_resolve(op)) in.push_back(o->address);
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
      for (std::size_t j = i + 1; j < in.size(); ++j) pairs.emplace_back(in[i], in[j]);
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [u, v] : pairs) {
      auto su = std::find_if(sets.begin(), sets.end(), [&](const auto& s) { return s.contains(u); });
      auto sv = std::find_if(sets.begin(), sets.end(), [&](const auto& s) { return s.contains(v); });
      if (su == sv) continue;
      su->insert(sv->begin(), sv->end());
      sets.erase(sv);
      changed = true;
    }
  }
  return {sets.begin(), sets.end()};
}

inline std::set<std::set<std::string>> as_sets(const chainarg::ClusterPartition& p) {
  std::set<std::set<std::string>> out;
  for (const auto& c : p.clusters()) out.insert({c.begin(), c.end()});
  return out;
}

// Random valid chain: every input spends an existing unspent output, values
// are conserved minus a small fee, and some transactions get equal outputs.
inline TransactionSet random_chain(std::mt19937_64& rng, int max_txs, int max_addresses) {
  std::uniform_int_distribution<int> ntx_d(1, max_txs);
  std::uniform_int_distribution<int> naddr_d(2, max_addresses);
  const int ntx = ntx_d(rng);
  const int naddr = naddr_d(rng);
  auto addr = [&] { return "addr" + std::to_string(std::uniform_int_distribution<int>(0, naddr - 1)(rng)); };

  std::vector<Transaction> txs;
  std::vector<std::pair<chainarg::Outpoint, Satoshi>> utxo;
  for (int t = 0; t < ntx; ++t) {
    Transaction tx;
    tx.txid = "t" + std::to_string(t);
    if (utxo.empty() || std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
      tx.is_coinbase = true;
      tx.outputs.push_back({addr(), std::uniform_int_distribution<Satoshi>(1000, 5'000'000'000)(rng)});
    } else {
      const int k = std::min<int>(static_cast<int>(utxo.size()), std::uniform_int_distribution<int>(1, 4)(rng));
      std::shuffle(utxo.begin(), utxo.end(), rng);
      Satoshi total = 0;
      for (int i = 0; i < k; ++i) {
        tx.inputs.push_back(utxo.back().first);
        total += utxo.back().second;
        utxo.pop_back();
      }
      const Satoshi fee = std::min<Satoshi>(total, std::uniform_int_distribution<Satoshi>(0, 1000)(rng));
      Satoshi rest = total - fee;
      const int nout = std::uniform_int_distribution<int>(1, 4)(rng);
      const bool equal = nout >= 2 && std::uniform_int_distribution<int>(0, 3)(rng) == 0;
      for (int i = 0; i < nout; ++i) {
        Satoshi v = 0;
        if (i + 1 == nout) {
          v = rest;
        } else if (equal) {
          v = rest / (nout - i) / 2;
        } else {
          v = std::uniform_int_distribution<Satoshi>(0, rest)(rng);
        }
        if (equal && i == 1) v = tx.outputs[0].value <= rest ? tx.outputs[0].value : v;
        v = std::min(v, rest);
        rest -= v;
        tx.outputs.push_back({addr(), v});
      }
    }
    for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) utxo.push_back({{tx.txid, i}, tx.outputs[i].value});
    txs.push_back(std::move(tx));
  }
  return TransactionSet(std::move(txs));
}

// Every legal labelling, by enumeration of all 3^n assignments.
inline std::vector<Labelling> legal_labellings(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> attackers(n);
  for (const auto& [a, b] : edges) attackers[b].push_back(a);
  std::vector<Labelling> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    Labelling lab(n);
    auto c = code;
    for (std::size_t i = 0; i < n; ++i) {
      lab[i] = static_cast<Label>(c % 3);
      c /= 3;
    }
    bool ok = true;
    for (std::size_t i = 0; ok && i < n; ++i) {
      bool all_out = true, some_in = false;
      for (auto a : attackers[i]) {
        all_out = all_out && lab[a] == Label::out;
        some_in = some_in || lab[a] == Label::in;
      }
      const Label want = all_out ? Label::in : (some_in ? Label::out : Label::undec);
      ok = lab[i] == want;
    }
    if (ok) out.push_back(std::move(lab));
  }
  return out;
}

inline std::set<std::size_t> in_set(const Labelling& lab) {
  std::set<std::size_t> s;
  for (std::size_t i = 0; i < lab.size(); ++i) {
    if (lab[i] == Label::in) s.insert(i);
  }
  return s;
}

// The legal labellings whose IN set is contained in every other one's.
inline std::vector<Labelling> in_minimal(const std::vector<Labelling>& labs) {
  std::vector<Labelling> out;
  for (const auto& l : labs) {
    const auto mine = in_set(l);
    bool minimal = std::all_of(labs.begin(), labs.end(), [&](const Labelling& o) {
      const auto other = in_set(o);
      return std::includes(other.begin(), other.end(), mine.begin(), mine.end());
    });
    if (minimal) out.push_back(l);
  }
  return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> random_edges(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const double density = std::uniform_real_distribution<double>(0.05, 0.4)(rng);
  std::bernoulli_distribution pick(density);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && pick(rng)) edges.emplace_back(a, b);
    }
  }
  return edges;
}

}  // namespace oracle
