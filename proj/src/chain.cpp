#include "chainarg/chain.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_set>

#include "chainarg/error.hpp"

namespace chainarg {

using nlohmann::json;

namespace {

const std::vector<Appearance> kNoAppearances;

void check_shape(const Transaction& tx) {
  if (tx.txid.empty()) throw SchemaError("transaction with empty txid");
  if (tx.is_coinbase && !tx.inputs.empty()) {
    throw SchemaError("transaction " + tx.txid + ": field 'inputs' must be empty for a coinbase");
  }
  if (!tx.is_coinbase && tx.inputs.empty()) {
    throw SchemaError("transaction " + tx.txid + ": field 'inputs' must not be empty");
  }
  if (tx.outputs.empty()) {
    throw SchemaError("transaction " + tx.txid + ": field 'outputs' must not be empty");
  }
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    const auto& out = tx.outputs[i];
    const auto where = "transaction " + tx.txid + ": outputs[" + std::to_string(i) + "]";
    if (out.address.empty()) throw SchemaError(where + ".address is empty");
    if (out.value < 0) throw SchemaError(where + ".value_sat is negative");
    if (out.value > kMaxMoney) throw SchemaError(where + ".value_sat exceeds the money supply");
  }
}

}  // namespace

TransactionSet::TransactionSet(std::vector<Transaction> transactions)
    : transactions_(std::move(transactions)) {
  for (std::size_t pos = 0; pos < transactions_.size(); ++pos) {
    const auto& tx = transactions_[pos];
    check_shape(tx);
    if (!by_txid_.emplace(tx.txid, pos).second) {
      throw SchemaError("transaction " + tx.txid + ": duplicate txid");
    }
  }

  auto note = [this](const std::string& address, Appearance app, std::size_t pos) {
    by_address_[address].push_back(std::move(app));
    auto [it, inserted] = first_seen_.emplace(address, pos);
    if (!inserted) it->second = std::min(it->second, pos);
  };

  for (std::size_t pos = 0; pos < transactions_.size(); ++pos) {
    const auto& tx = transactions_[pos];
    std::unordered_set<std::string> spent_from;
    for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
      const auto& in = tx.inputs[i];
      if (spent_from.insert(in.txid).second) spenders_[in.txid].push_back(pos);
      if (const auto* out = try_resolve(in)) note(out->address, {tx.txid, Role::input, i}, pos);
    }
    for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
      note(tx.outputs[i].address, {tx.txid, Role::output, i}, pos);
    }
  }
}

const Transaction* TransactionSet::find(std::string_view txid) const {
  auto it = by_txid_.find(std::string(txid));
  return it == by_txid_.end() ? nullptr : &transactions_[it->second];
}

std::optional<std::size_t> TransactionSet::position(std::string_view txid) const {
  auto it = by_txid_.find(std::string(txid));
  if (it == by_txid_.end()) return std::nullopt;
  return it->second;
}

const TxOutput* TransactionSet::try_resolve(const Outpoint& op) const {
  const auto* tx = find(op.txid);
  if (tx == nullptr || op.vout >= tx->outputs.size()) return nullptr;
  return &tx->outputs[op.vout];
}

const std::vector<Appearance>& TransactionSet::appearances(std::string_view address) const {
  auto it = by_address_.find(address);
  return it == by_address_.end() ? kNoAppearances : it->second;
}

std::optional<std::size_t> TransactionSet::first_seen(std::string_view address) const {
  auto it = first_seen_.find(address);
  if (it == first_seen_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> TransactionSet::addresses() const {
  std::vector<std::string> out;
  out.reserve(by_address_.size());
  for (const auto& [address, _] : by_address_) out.push_back(address);
  return out;
}

std::span<const std::size_t> TransactionSet::spenders(std::string_view txid) const {
  auto it = spenders_.find(std::string(txid));
  if (it == spenders_.end()) return {};
  return it->second;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

namespace {

void require_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(where + ": unknown field '" + key + "'");
    }
  }
  for (auto name : allowed) {
    if (!obj.contains(name)) throw SchemaError(where + ": missing field '" + std::string(name) + "'");
  }
}

std::string txid_for_errors(const json& tx, std::size_t index) {
  if (tx.is_object() && tx.contains("txid") && tx["txid"].is_string()) {
    return tx["txid"].get<std::string>();
  }
  return "#" + std::to_string(index);
}

Transaction transaction_from_json(const json& doc, std::size_t index) {
  const auto name = txid_for_errors(doc, index);
  const auto where = "transaction " + name;
  require_fields(doc, {"txid", "coinbase", "inputs", "outputs"}, where);

  Transaction tx;
  if (!doc["txid"].is_string()) throw SchemaError(where + ": field 'txid' must be a string");
  tx.txid = doc["txid"].get<std::string>();
  if (!doc["coinbase"].is_boolean()) throw SchemaError(where + ": field 'coinbase' must be a boolean");
  tx.is_coinbase = doc["coinbase"].get<bool>();

  if (!doc["inputs"].is_array()) throw SchemaError(where + ": field 'inputs' must be an array");
  for (std::size_t i = 0; i < doc["inputs"].size(); ++i) {
    const auto& in = doc["inputs"][i];
    const auto in_where = where + ": inputs[" + std::to_string(i) + "]";
    require_fields(in, {"txid", "vout"}, in_where);
    if (!in["txid"].is_string()) throw SchemaError(in_where + ".txid must be a string");
    if (!in["vout"].is_number_unsigned() ||
        in["vout"].get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw SchemaError(in_where + ".vout must be a non-negative integer");
    }
    tx.inputs.push_back({in["txid"].get<std::string>(), in["vout"].get<std::uint32_t>()});
  }

  if (!doc["outputs"].is_array()) throw SchemaError(where + ": field 'outputs' must be an array");
  for (std::size_t i = 0; i < doc["outputs"].size(); ++i) {
    const auto& out = doc["outputs"][i];
    const auto out_where = where + ": outputs[" + std::to_string(i) + "]";
    require_fields(out, {"address", "value_sat"}, out_where);
    if (!out["address"].is_string()) throw SchemaError(out_where + ".address must be a string");
    if (!out["value_sat"].is_number_integer()) {
      throw SchemaError(out_where + ".value_sat must be an integer");
    }
    if (out["value_sat"].is_number_unsigned() &&
        out["value_sat"].get<std::uint64_t>() > static_cast<std::uint64_t>(kMaxMoney)) {
      throw SchemaError(out_where + ".value_sat exceeds the money supply");
    }
    tx.outputs.push_back({out["address"].get<std::string>(), out["value_sat"].get<Satoshi>()});
  }
  return tx;
}

}  // namespace

TransactionSet chain_from_json(const json& doc) {
  require_fields(doc, {"transactions"}, "chain file");
  if (!doc["transactions"].is_array()) throw SchemaError("chain file: 'transactions' must be an array");

  std::vector<Transaction> txs;
  txs.reserve(doc["transactions"].size());
  for (std::size_t i = 0; i < doc["transactions"].size(); ++i) {
    txs.push_back(transaction_from_json(doc["transactions"][i], i));
  }

  // Out-of-range indexes into known transactions are a schema problem;
  // unknown txids are left for validate_set() to report.
  std::unordered_map<std::string, std::size_t> output_counts;
  for (const auto& tx : txs) output_counts.emplace(tx.txid, tx.outputs.size());
  for (const auto& tx : txs) {
    for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
      const auto& in = tx.inputs[i];
      auto it = output_counts.find(in.txid);
      if (it != output_counts.end() && in.vout >= it->second) {
        throw SchemaError("transaction " + tx.txid + ": inputs[" + std::to_string(i) + "].vout " +
                          std::to_string(in.vout) + " out of range for " + in.txid + " (" +
                          std::to_string(it->second) + " outputs)");
      }
    }
  }
  return TransactionSet(std::move(txs));
}

TransactionSet parse_chain_file(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    const auto offset = e.byte == 0 ? 0 : e.byte - 1;
    const auto [line, column] = line_column(raw, offset);
    throw ParseError("malformed chain file JSON", line, column);
  }
  return chain_from_json(doc);
}

json chain_to_json(const TransactionSet& set) {
  json txs = json::array();
  for (const auto& tx : set.transactions()) {
    json inputs = json::array();
    for (const auto& in : tx.inputs) inputs.push_back({{"txid", in.txid}, {"vout", in.vout}});
    json outputs = json::array();
    for (const auto& out : tx.outputs) {
      outputs.push_back({{"address", out.address}, {"value_sat", out.value}});
    }
    txs.push_back(
        {{"txid", tx.txid}, {"coinbase", tx.is_coinbase}, {"inputs", inputs}, {"outputs", outputs}});
  }
  return {{"transactions", txs}};
}

std::string serialize_chain(const TransactionSet& set) { return chain_to_json(set).dump(2) + "\n"; }

TxOutput resolve_input(const TransactionSet& set, const Outpoint& op) {
  const auto* out = set.try_resolve(op);
  if (out == nullptr) {
    throw LookupError("dangling outpoint " + op.txid + ":" + std::to_string(op.vout));
  }
  return *out;
}

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::negative_fee:
      return "negative-fee";
    case FindingKind::dangling_outpoint:
      return "dangling-outpoint";
    case FindingKind::double_spend:
      return "double-spend";
  }
  return "?";
}

std::vector<Finding> ValidationReport::findings_for(std::string_view txid) const {
  std::vector<Finding> out;
  for (const auto& f : findings) {
    if (f.txid == txid) out.push_back(f);
  }
  return out;
}

ValidationReport validate_set(const TransactionSet& set) {
  ValidationReport report;
  std::set<Outpoint> spent;

  for (std::size_t pos = 0; pos < set.size(); ++pos) {
    const auto& tx = set.at(pos);
    Satoshi out_sum = 0;
    for (const auto& out : tx.outputs) out_sum += out.value;

    if (tx.is_coinbase) {
      report.coinbase_total += out_sum;
      continue;
    }

    Satoshi in_sum = 0;
    bool all_resolved = true;
    for (const auto& in : tx.inputs) {
      const auto where = in.txid + ":" + std::to_string(in.vout);
      const auto* out = set.try_resolve(in);
      const auto producer = set.position(in.txid);
      if (out == nullptr || !producer || *producer >= pos) {
        all_resolved = false;
        report.findings.push_back({FindingKind::dangling_outpoint, tx.txid,
                                   out == nullptr ? "input " + where + " does not resolve"
                                                  : "input " + where + " references a later transaction"});
        continue;
      }
      if (!spent.insert(in).second) {
        report.findings.push_back(
            {FindingKind::double_spend, tx.txid, "output " + where + " already spent"});
        all_resolved = false;
        continue;
      }
      in_sum += out->value;
    }

    // No fee for transactions with dangling or double-spent inputs.
    if (!all_resolved) continue;
    const Satoshi fee = in_sum - out_sum;
    report.fees.push_back({tx.txid, fee});
    report.fee_total += fee;
    if (fee < 0) {
      report.findings.push_back({FindingKind::negative_fee, tx.txid,
                                 "outputs exceed inputs by " + std::to_string(-fee) + " sat"});
    }
  }

  for (const auto& tx : set.transactions()) {
    for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
      if (!spent.contains(Outpoint{tx.txid, i})) report.unspent_total += tx.outputs[i].value;
    }
  }
  return report;
}

}  // namespace chainarg
