#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace taintrank {

using NodeId = std::uint32_t;
using EdgeIndex = std::uint32_t;

/// Monetary amounts are integer satoshi throughout; 1 BTC = 10^8 satoshi.
using Satoshi = std::uint64_t;
inline constexpr Satoshi kSatoshiPerBtc = 100'000'000;

enum class ValueMode { in, out };

/// Aggregated transfer between two distinct nodes.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  Satoshi weight = 0;
  std::uint32_t tx_count = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Adjacency entry as seen from one endpoint.
struct Arc {
  NodeId neighbor = 0;
  Satoshi weight = 0;
  EdgeIndex edge = 0;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;

/// Immutable weighted directed graph over dense node ids.
///
/// Edges are stored sorted by (src, dst); both adjacency directions list
/// neighbors in ascending id order. Every constructed graph satisfies:
/// no self-loops, at most one edge per ordered pair, weight >= 1 and
/// tx_count >= 1. Safe for concurrent readers.
class TxGraph {
 public:
  TxGraph() = default;

  /// Validates the parts and builds both adjacency indexes. Edge order is
  /// irrelevant. Throws DomainError on any invariant violation.
  TxGraph(std::vector<std::string> labels, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool contains(NodeId n) const noexcept { return n < labels_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  const std::string& label(NodeId n) const;

  std::optional<NodeId> find(std::string_view label) const;
  /// Like find() but throws DomainError naming the label when absent.
  NodeId id_of(std::string_view label) const;

  std::span<const Arc> out_neighbors(NodeId n) const;
  std::span<const Arc> in_neighbors(NodeId n) const;
  std::size_t out_degree(NodeId n) const { return out_neighbors(n).size(); }
  std::size_t in_degree(NodeId n) const { return in_neighbors(n).size(); }

  /// Sum of in-edge (mode=in) or out-edge (mode=out) weights; 0 if none.
  Satoshi node_value(NodeId n, ValueMode mode) const;

  /// 2L/N, absent for the empty graph.
  std::optional<double> average_degree() const;

  /// Subgraph induced by `nodes` (duplicates ignored). New ids follow
  /// ascending original id; labels are preserved.
  TxGraph induced_subgraph(std::span<const NodeId> nodes) const;

 private:
  void check(NodeId n) const;

  std::vector<std::string> labels_;
  StringMap<NodeId> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Arc> out_arcs_;
  std::vector<Arc> in_arcs_;
  std::vector<Satoshi> in_value_;
  std::vector<Satoshi> out_value_;
};

/// 2L/N for arbitrary counts; absent when nodes == 0.
std::optional<double> average_degree(std::size_t nodes, std::size_t links);

/// Single-writer accumulator of address-level transfers.
///
/// Node ids are assigned in first-seen order. Parallel transfers between the
/// same ordered pair collapse into one edge (weights summed, tx_count
/// incremented); self-transfers are discarded.
class GraphBuilder {
 public:
  NodeId add_node(std::string_view label);
  void add_transfer(std::string_view src, std::string_view dst, Satoshi value);

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t self_loops_dropped() const noexcept { return self_loops_; }

  /// Produces the immutable graph. The builder cannot be used afterwards.
  TxGraph finalize();

 private:
  void ensure_open() const;

  std::vector<std::string> labels_;
  StringMap<NodeId> index_;
  std::unordered_map<std::uint64_t, std::size_t> slot_;
  std::vector<Edge> edges_;
  std::size_t self_loops_ = 0;
  bool finalized_ = false;
};

}  // namespace taintrank
