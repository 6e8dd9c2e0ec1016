#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taintrank/graph.hpp"

namespace taintrank {

struct TxEntry {
  std::string address;
  Satoshi value = 0;

  friend bool operator==(const TxEntry&, const TxEntry&) = default;
};

/// One raw transaction. Coinbase transactions have no inputs.
struct TransactionRecord {
  std::string tx_id;
  std::vector<TxEntry> inputs;
  std::vector<TxEntry> outputs;
  std::optional<std::int64_t> timestamp;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

enum class ValueUnit { satoshi, btc };

struct ParseOptions {
  ValueUnit unit = ValueUnit::satoshi;
  bool strict = false;  // throw ParseError on the first malformed line
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

/// Entries removed while parsing: zero values, and entries without an
/// address (non-standard scripts).
struct DroppedEntries {
  std::size_t zero_value = 0;
  std::size_t unaddressed = 0;
};

struct ParseResult {
  std::vector<TransactionRecord> records;
  std::vector<ParseIssue> errors;
  std::size_t lines_read = 0;
  DroppedEntries dropped;
};

/// Reads one JSON object per line:
///   {"tx_id": "...", "timestamp": 1308528000,
///    "inputs":  [{"address": "...", "value": 5000000000}, ...],
///    "outputs": [{"address": "...", "value": 4999000000}, ...]}
/// "inputs" may be missing, null or empty (coinbase); "outputs" must be a
/// non-empty array; "timestamp" (unix seconds) is optional. Values are
/// integer satoshi, or BTC (number or decimal string) with ValueUnit::btc.
/// Blank lines are ignored.
ParseResult parse_records(std::istream& in, const ParseOptions& options = {});

/// Parses a single record; throws ParseError (line 0) when malformed.
TransactionRecord parse_record(std::string_view json, ValueUnit unit,
                               DroppedEntries* dropped = nullptr);

/// Exact conversion of a non-negative decimal BTC amount ("0.015") to
/// satoshi. Throws ParseError on bad syntax, more than 8 decimals or overflow.
Satoshi parse_btc_amount(std::string_view text);

/// Union-find over address strings.
///
/// The representative of a cluster is its lexicographically smallest
/// address, so the partition and the representatives do not depend on the
/// order in which unions were applied.
class ClusterMap {
 public:
  void add(std::string_view address);
  void unite(std::string_view a, std::string_view b);

  /// Canonical address of a's cluster. Unknown addresses are their own
  /// representative (the returned view then aliases the argument).
  std::string_view representative(std::string_view address) const;

  std::size_t address_count() const noexcept { return addresses_.size(); }
  std::size_t cluster_count() const noexcept { return clusters_; }

 private:
  std::size_t intern(std::string_view address);
  std::size_t root(std::size_t i) const;

  std::vector<std::string> addresses_;
  StringMap<std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::vector<std::size_t> smallest_;  // per root: index of the smallest address
  std::size_t clusters_ = 0;
};

/// Co-spend heuristic: all input addresses of a transaction are merged.
/// Output addresses are never merged (but are not registered either).
ClusterMap cluster_inputs(std::span<const TransactionRecord> records);

/// How an output's value is attributed to the (distinct) input nodes.
enum class PairingRule {
  proportional,     // split by input value
  full_mesh_equal,  // split equally across input nodes
};

std::string_view to_string(PairingRule rule);
std::optional<PairingRule> parse_pairing(std::string_view text);

/// Inclusive on both ends.
struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const noexcept { return start <= t && t <= end; }
};

/// Records whose timestamp lies in the window; records without a timestamp
/// are excluded.
std::vector<TransactionRecord> filter_window(std::span<const TransactionRecord> records,
                                             TimeWindow window);

/// Splits `total` into integer parts proportional to `shares` using the
/// largest-remainder rule; parts sum to `total` exactly. Ties go to the
/// earlier share. All shares zero (or none) yields all-zero parts.
std::vector<Satoshi> apportion(Satoshi total, std::span<const Satoshi> shares);

struct Transfer {
  std::string src;
  std::string dst;
  Satoshi value = 0;
};

struct TransactionTransfers {
  std::vector<std::string> nodes;   // every node touched, first-seen order
  std::vector<Transfer> transfers;  // one per distinct (src, dst), src != dst
  Satoshi self_loop_value = 0;      // value routed back to its own input node
};

/// Turns one transaction into node-level transfers after mapping addresses
/// through `clusters` (when given).
TransactionTransfers transaction_transfers(const TransactionRecord& record,
                                           const ClusterMap* clusters, PairingRule pairing);

struct BuildOptions {
  PairingRule pairing = PairingRule::proportional;
  const ClusterMap* clusters = nullptr;
  std::optional<TimeWindow> window;
};

struct BuildStats {
  std::size_t transactions_used = 0;
  std::size_t transactions_outside_window = 0;
  std::size_t coinbase_transactions = 0;
  std::size_t transfers = 0;
  Satoshi self_loop_value = 0;
};

struct BuildResult {
  TxGraph graph;
  BuildStats stats;
};

BuildResult build_graph(std::span<const TransactionRecord> records,
                        const BuildOptions& options = {});

}  // namespace taintrank
