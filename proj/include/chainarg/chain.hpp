#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace chainarg {

using Satoshi = std::int64_t;

inline constexpr Satoshi kSatoshiPerBtc = 100'000'000;
inline constexpr Satoshi kMaxMoney = 21'000'000 * kSatoshiPerBtc;

struct Outpoint {
  std::string txid;
  std::uint32_t vout = 0;

  auto operator<=>(const Outpoint&) const = default;
};

struct TxOutput {
  std::string address;
  Satoshi value = 0;

  bool operator==(const TxOutput&) const = default;
};

struct Transaction {
  std::string txid;
  bool is_coinbase = false;
  std::vector<Outpoint> inputs;
  std::vector<TxOutput> outputs;

  bool operator==(const Transaction&) const = default;
};

enum class Role { input, output };

// One place where an address shows up: as the resolved owner of an input, or
// as the payee of an output. `index` is the input or output position.
struct Appearance {
  std::string txid;
  Role role = Role::output;
  std::size_t index = 0;

  bool operator==(const Appearance&) const = default;
};

// Ordered, indexed transaction graph. Immutable after construction.
//
// The constructor enforces per-transaction shape (unique txids, coinbase
// inputs empty, non-empty outputs, value range) but tolerates dangling or
// double-spent outpoints so that validate_set() can report them.
class TransactionSet {
 public:
  TransactionSet() = default;
  explicit TransactionSet(std::vector<Transaction> transactions);

  std::span<const Transaction> transactions() const { return transactions_; }
  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }

  const Transaction* find(std::string_view txid) const;
  std::optional<std::size_t> position(std::string_view txid) const;
  const Transaction& at(std::size_t position) const { return transactions_.at(position); }

  // Output referenced by `op`, or nothing when the txid is unknown or the
  // index is out of range.
  const TxOutput* try_resolve(const Outpoint& op) const;

  const std::vector<Appearance>& appearances(std::string_view address) const;
  // Position of the first transaction in which `address` appears.
  std::optional<std::size_t> first_seen(std::string_view address) const;
  // Every address appearing anywhere in the set, sorted.
  std::vector<std::string> addresses() const;

  // Positions of transactions with at least one input referencing `txid`,
  // ascending, without duplicates.
  std::span<const std::size_t> spenders(std::string_view txid) const;

  bool operator==(const TransactionSet& other) const { return transactions_ == other.transactions_; }

 private:
  std::vector<Transaction> transactions_;
  std::unordered_map<std::string, std::size_t> by_txid_;
  std::map<std::string, std::vector<Appearance>, std::less<>> by_address_;
  std::map<std::string, std::size_t, std::less<>> first_seen_;
  std::unordered_map<std::string, std::vector<std::size_t>> spenders_;
};

// Parses the chain-file JSON format. Throws ParseError for malformed JSON and
// SchemaError (naming the txid and field) for schema violations.
TransactionSet parse_chain_file(std::string_view raw);
TransactionSet chain_from_json(const nlohmann::json& doc);

nlohmann::json chain_to_json(const TransactionSet& set);
std::string serialize_chain(const TransactionSet& set);

// Address and value of the referenced output; LookupError when dangling.
TxOutput resolve_input(const TransactionSet& set, const Outpoint& op);

enum class FindingKind { negative_fee, dangling_outpoint, double_spend };

struct Finding {
  FindingKind kind;
  std::string txid;
  std::string detail;

  bool operator==(const Finding&) const = default;
};

struct TxFee {
  std::string txid;
  Satoshi fee = 0;
};

struct ValidationReport {
  // One entry per non-coinbase transaction whose inputs all resolve.
  std::vector<TxFee> fees;
  std::vector<Finding> findings;

  Satoshi coinbase_total = 0;
  Satoshi fee_total = 0;
  Satoshi unspent_total = 0;

  bool valid() const { return findings.empty(); }
  // fee_total + unspent_total == coinbase_total
  bool conserved() const { return fee_total + unspent_total == coinbase_total; }
  std::vector<Finding> findings_for(std::string_view txid) const;
};

ValidationReport validate_set(const TransactionSet& set);

std::string_view to_string(FindingKind kind);

// Shared helper: 1-based line/column of a byte offset in `text`.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset);

}  // namespace chainarg
