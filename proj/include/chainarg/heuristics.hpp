#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chainarg/chain.hpp"

namespace chainarg {

struct HeuristicParams {
  int coinjoin_min_equal_outputs = 2;
  int coinjoin_min_inputs = 2;
  bool apply_coinjoin_filter = true;
  // When false, an output paying back to one of the transaction's own input
  // addresses is accepted as change instead of requiring a fresh address.
  bool change_requires_fresh_address = true;

  // Throws std::invalid_argument when a threshold is below 2.
  void validate() const;

  bool operator==(const HeuristicParams&) const = default;
};

nlohmann::json to_json(const HeuristicParams& p);
HeuristicParams heuristic_params_from_json(const nlohmann::json& doc);

struct CoinJoinVerdict {
  bool is_coinjoin = false;
  std::optional<Satoshi> repeated_value;
  std::size_t repeat_count = 0;
  std::size_t input_count = 0;
  std::string reason;
};

CoinJoinVerdict detect_coinjoin(const Transaction& tx, const TransactionSet& set,
                                const HeuristicParams& params = {});

struct ChangeVerdict {
  std::size_t output_index = 0;
  std::string reason;
};

std::optional<ChangeVerdict> detect_change_output(const Transaction& tx, const TransactionSet& set,
                                                  const HeuristicParams& params = {});

// Union-find over dense indexes with path compression and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);

  std::size_t find(std::size_t x);
  // True when two different sets were merged.
  bool unite(std::size_t a, std::size_t b);
  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct ClusterMerge {
  std::string txid;
  std::string left;
  std::string right;

  bool operator==(const ClusterMerge&) const = default;
};

// Disjoint address sets. Each cluster is sorted; clusters are ordered by
// their smallest address, so cluster ids are canonical.
class ClusterPartition {
 public:
  ClusterPartition() = default;
  ClusterPartition(std::vector<std::vector<std::string>> clusters, std::vector<ClusterMerge> merges);

  const std::vector<std::vector<std::string>>& clusters() const { return clusters_; }
  const std::vector<ClusterMerge>& merges() const { return merges_; }
  std::size_t address_count() const { return cluster_of_.size(); }

  // LookupError for addresses not in the partition.
  std::size_t cluster_id(std::string_view address) const;
  bool contains(std::string_view address) const;
  bool same_cluster(std::string_view a, std::string_view b) const;
  // Merges whose addresses ended up in `cluster`.
  std::vector<ClusterMerge> merges_in(std::size_t cluster) const;

  // Every cluster of *this lies inside one cluster of `coarser`, over the same addresses.
  bool refines(const ClusterPartition& coarser) const;

  // Same sets; merge provenance is not compared.
  bool same_sets(const ClusterPartition& other) const { return clusters_ == other.clusters_; }
  bool operator==(const ClusterPartition& other) const = default;

 private:
  std::vector<std::vector<std::string>> clusters_;
  std::vector<ClusterMerge> merges_;
  std::map<std::string, std::size_t, std::less<>> cluster_of_;
};

ClusterPartition multi_input_cluster(const TransactionSet& set, const HeuristicParams& params = {});

nlohmann::json to_json(const ClusterPartition& partition);

struct FlowPath {
  std::vector<std::string> txids;

  auto operator<=>(const FlowPath&) const = default;
};

// All paths of at most `max_hops` transactions from a spend of `from` to a
// payment into `to`, where each hop spends an output of the previous one.
// Sorted lexicographically by txid sequence. std::invalid_argument when
// max_hops < 1.
std::vector<FlowPath> trace_flows(const TransactionSet& set, const std::set<std::string>& from,
                                  const std::set<std::string>& to, int max_hops);

// Resolved input addresses of `tx`, in input order, duplicates removed.
std::vector<std::string> input_addresses(const Transaction& tx, const TransactionSet& set);

}  // namespace chainarg
