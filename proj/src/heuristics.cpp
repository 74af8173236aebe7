#include "chainarg/heuristics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "chainarg/error.hpp"

namespace chainarg {

using nlohmann::json;

void HeuristicParams::validate() const {
  if (coinjoin_min_equal_outputs < 2) {
    throw std::invalid_argument("coinjoin_min_equal_outputs must be at least 2");
  }
  if (coinjoin_min_inputs < 2) throw std::invalid_argument("coinjoin_min_inputs must be at least 2");
}

json to_json(const HeuristicParams& p) {
  return {{"coinjoin_min_equal_outputs", p.coinjoin_min_equal_outputs},
          {"coinjoin_min_inputs", p.coinjoin_min_inputs},
          {"apply_coinjoin_filter", p.apply_coinjoin_filter},
          {"change_requires_fresh_address", p.change_requires_fresh_address}};
}

HeuristicParams heuristic_params_from_json(const json& doc) {
  HeuristicParams p;
  if (!doc.is_object()) throw SchemaError("heuristics must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "coinjoin_min_equal_outputs" && value.is_number_integer()) {
      p.coinjoin_min_equal_outputs = value.get<int>();
    } else if (key == "coinjoin_min_inputs" && value.is_number_integer()) {
      p.coinjoin_min_inputs = value.get<int>();
    } else if (key == "apply_coinjoin_filter" && value.is_boolean()) {
      p.apply_coinjoin_filter = value.get<bool>();
    } else if (key == "change_requires_fresh_address" && value.is_boolean()) {
      p.change_requires_fresh_address = value.get<bool>();
    } else {
      throw SchemaError("heuristics: unknown or mistyped field '" + key + "'");
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("heuristics: ") + e.what());
  }
  return p;
}

std::vector<std::string> input_addresses(const Transaction& tx, const TransactionSet& set) {
  std::vector<std::string> out;
  for (const auto& in : tx.inputs) {
    const auto* prev = set.try_resolve(in);
    if (prev != nullptr && std::find(out.begin(), out.end(), prev->address) == out.end()) {
      out.push_back(prev->address);
    }
  }
  return out;
}

CoinJoinVerdict detect_coinjoin(const Transaction& tx, const TransactionSet&,
                                const HeuristicParams& params) {
  CoinJoinVerdict v;
  v.input_count = tx.inputs.size();
  if (tx.is_coinbase) {
    v.reason = "coinbase transaction";
    return v;
  }

  std::map<Satoshi, std::size_t> counts;
  for (const auto& out : tx.outputs) ++counts[out.value];
  // Most frequent value; ties go to the smallest value.
  for (const auto& [value, count] : counts) {
    if (count > v.repeat_count) {
      v.repeat_count = count;
      v.repeated_value = value;
    }
  }
  if (v.repeat_count < 2) v.repeated_value.reset();

  const bool enough_inputs = v.input_count >= static_cast<std::size_t>(params.coinjoin_min_inputs);
  const bool enough_equal =
      v.repeat_count >= static_cast<std::size_t>(params.coinjoin_min_equal_outputs);
  v.is_coinjoin = enough_inputs && enough_equal;

  std::string equal_part = v.repeated_value
                               ? "value " + std::to_string(*v.repeated_value) + " sat occurs " +
                                     std::to_string(v.repeat_count) + " times"
                               : "no repeated output value";
  v.reason = std::to_string(v.input_count) + " inputs (threshold " +
             std::to_string(params.coinjoin_min_inputs) + "), " + equal_part + " (threshold " +
             std::to_string(params.coinjoin_min_equal_outputs) + ")";
  return v;
}

std::optional<ChangeVerdict> detect_change_output(const Transaction& tx, const TransactionSet& set,
                                                  const HeuristicParams& params) {
  if (tx.is_coinbase || tx.outputs.size() < 2) return std::nullopt;
  const auto pos = set.position(tx.txid);
  if (!pos) return std::nullopt;

  const auto inputs = input_addresses(tx, set);
  auto is_input = [&](const std::string& a) {
    return std::find(inputs.begin(), inputs.end(), a) != inputs.end();
  };

  if (!params.change_requires_fresh_address) {
    std::vector<std::size_t> self;
    for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
      if (is_input(tx.outputs[i].address)) self.push_back(i);
    }
    if (self.size() == 1) {
      return ChangeVerdict{self.front(), "output " + std::to_string(self.front()) + " pays back to input address " +
                                             tx.outputs[self.front()].address};
    }
  }

  // Fresh: the address shows up for the first time in this transaction and
  // only as an output.
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    const auto& addr = tx.outputs[i].address;
    if (set.first_seen(addr) == pos && !is_input(addr)) fresh.push_back(i);
  }
  if (fresh.size() != 1) return std::nullopt;

  const auto idx = fresh.front();
  std::string reason = "output " + std::to_string(idx) + " (" + tx.outputs[idx].address +
                       ") is a fresh address; other outputs reuse earlier addresses:";
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    if (i == idx) continue;
    const auto& addr = tx.outputs[i].address;
    reason += " " + addr + " (first seen in " + set.at(*set.first_seen(addr)).txid + ")";
  }
  return ChangeVerdict{idx, std::move(reason)};
}

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    auto next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

ClusterPartition::ClusterPartition(std::vector<std::vector<std::string>> clusters,
                                   std::vector<ClusterMerge> merges)
    : clusters_(std::move(clusters)), merges_(std::move(merges)) {
  for (auto& c : clusters_) {
    if (c.empty()) throw std::invalid_argument("empty cluster");
    std::sort(c.begin(), c.end());
  }
  std::sort(clusters_.begin(), clusters_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t id = 0; id < clusters_.size(); ++id) {
    for (const auto& a : clusters_[id]) {
      if (!cluster_of_.emplace(a, id).second) {
        throw std::invalid_argument("address " + a + " in two clusters");
      }
    }
  }
}

std::size_t ClusterPartition::cluster_id(std::string_view address) const {
  auto it = cluster_of_.find(address);
  if (it == cluster_of_.end()) throw LookupError("address " + std::string(address) + " not clustered");
  return it->second;
}

bool ClusterPartition::contains(std::string_view address) const {
  return cluster_of_.find(address) != cluster_of_.end();
}

bool ClusterPartition::same_cluster(std::string_view a, std::string_view b) const {
  return cluster_id(a) == cluster_id(b);
}

std::vector<ClusterMerge> ClusterPartition::merges_in(std::size_t cluster) const {
  std::vector<ClusterMerge> out;
  for (const auto& m : merges_) {
    if (cluster_id(m.left) == cluster) out.push_back(m);
  }
  return out;
}

bool ClusterPartition::refines(const ClusterPartition& coarser) const {
  if (address_count() != coarser.address_count()) return false;
  for (const auto& c : clusters_) {
    if (!coarser.contains(c.front())) return false;
    const auto target = coarser.cluster_id(c.front());
    for (const auto& a : c) {
      if (!coarser.contains(a) || coarser.cluster_id(a) != target) return false;
    }
  }
  return true;
}

ClusterPartition multi_input_cluster(const TransactionSet& set, const HeuristicParams& params) {
  params.validate();
  const auto addresses = set.addresses();
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < addresses.size(); ++i) index.emplace(addresses[i], i);

  UnionFind uf(addresses.size());
  std::vector<ClusterMerge> merges;
  for (const auto& tx : set.transactions()) {
    if (tx.is_coinbase) continue;
    if (params.apply_coinjoin_filter && detect_coinjoin(tx, set, params).is_coinjoin) continue;
    const auto inputs = input_addresses(tx, set);
    for (std::size_t i = 1; i < inputs.size(); ++i) {
      if (uf.unite(index.at(inputs.front()), index.at(inputs[i]))) {
        merges.push_back({tx.txid, inputs.front(), inputs[i]});
      }
    }
  }

  std::map<std::size_t, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < addresses.size(); ++i) by_root[uf.find(i)].push_back(addresses[i]);
  std::vector<std::vector<std::string>> clusters;
  clusters.reserve(by_root.size());
  for (auto& [_, members] : by_root) clusters.push_back(std::move(members));
  return ClusterPartition(std::move(clusters), std::move(merges));
}

json to_json(const ClusterPartition& partition) {
  json clusters = json::array();
  for (std::size_t id = 0; id < partition.clusters().size(); ++id) {
    json merges = json::array();
    for (const auto& m : partition.merges_in(id)) {
      merges.push_back({{"txid", m.txid}, {"left", m.left}, {"right", m.right}});
    }
    clusters.push_back({{"cluster_id", id}, {"addresses", partition.clusters()[id]}, {"merges", merges}});
  }
  return {{"clusters", clusters}};
}

std::vector<FlowPath> trace_flows(const TransactionSet& set, const std::set<std::string>& from,
                                  const std::set<std::string>& to, int max_hops) {
  if (max_hops < 1) throw std::invalid_argument("max_hops must be at least 1");

  auto pays_into_target = [&](const Transaction& tx) {
    return std::any_of(tx.outputs.begin(), tx.outputs.end(),
                       [&](const TxOutput& o) { return to.contains(o.address); });
  };

  std::vector<FlowPath> paths;
  std::vector<std::size_t> stack;

  auto walk = [&](auto&& self, std::size_t pos) -> void {
    stack.push_back(pos);
    const auto& tx = set.at(pos);
    if (pays_into_target(tx)) {
      FlowPath p;
      for (auto s : stack) p.txids.push_back(set.at(s).txid);
      paths.push_back(std::move(p));
    }
    if (stack.size() < static_cast<std::size_t>(max_hops)) {
      for (auto next : set.spenders(tx.txid)) {
        if (std::find(stack.begin(), stack.end(), next) == stack.end()) self(self, next);
      }
    }
    stack.pop_back();
  };

  for (std::size_t pos = 0; pos < set.size(); ++pos) {
    const auto& tx = set.at(pos);
    if (tx.is_coinbase) continue;
    const auto inputs = input_addresses(tx, set);
    if (std::any_of(inputs.begin(), inputs.end(), [&](const auto& a) { return from.contains(a); })) {
      walk(walk, pos);
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace chainarg
