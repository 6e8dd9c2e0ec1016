#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "taintrank/graph.hpp"

namespace taintrank {

enum class TaintMethod {
  fixed,
  weight_in,
  weight_out,
  distance,
  combined_avg,
  combined_max,
  pagerank_like,
};

inline constexpr std::array kAllMethods = {
    TaintMethod::fixed,        TaintMethod::weight_in,    TaintMethod::weight_out,
    TaintMethod::distance,     TaintMethod::combined_avg, TaintMethod::combined_max,
    TaintMethod::pagerank_like,
};

std::string_view to_string(TaintMethod method);
std::optional<TaintMethod> parse_method(std::string_view text);

/// Per-node scores over the whole node universe of the graph they were
/// computed on. Nodes outside `reachable` score 0 for every method except
/// pagerank_like; the root scores exactly 1 for every method except
/// pagerank_like.
struct TaintScores {
  TaintMethod method = TaintMethod::fixed;
  NodeId root = 0;
  std::uint32_t iterations = 1;
  std::uint32_t sweeps = 1;
  std::vector<double> scores;
  std::vector<NodeId> reachable;  // ascending
};

/// Unweighted directed hop distances from a root.
class DistanceMap {
 public:
  static constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

  DistanceMap(const TxGraph& graph, NodeId root);

  NodeId root() const noexcept { return root_; }
  std::uint32_t operator[](NodeId n) const { return hops_.at(n); }
  bool reachable(NodeId n) const { return hops_.at(n) != kUnreachable; }
  std::uint32_t max_distance() const noexcept { return max_; }

  /// Reachable nodes by ascending (distance, id); the root comes first.
  std::span<const NodeId> sweep_order() const noexcept { return order_; }
  /// Reachable nodes by ascending id.
  std::vector<NodeId> reachable_nodes() const;

 private:
  NodeId root_;
  std::vector<std::uint32_t> hops_;
  std::vector<NodeId> order_;
  std::uint32_t max_ = 0;
};

struct ReachableSubgraph {
  std::vector<NodeId> nodes;  // original ids, ascending
  TxGraph graph;              // induced subgraph, ids renumbered
};

ReachableSubgraph reachable_subgraph(const TxGraph& graph, NodeId root);

// The sweep-based methods visit reachable nodes in DistanceMap::sweep_order()
// and overwrite each non-root score with the sum over its in-neighbors,
// reading whatever value a neighbor currently holds (0 before it is first
// assigned). `sweeps` repeats the pass. The root is pinned at 1.

TaintScores taint_fixed(const TxGraph& graph, NodeId root);

/// Sum over in-neighbors j of t_j * w(j,i) / V_j, with V_j the node value of
/// j on `graph` in the given mode. Terms with V_j = 0 contribute nothing.
TaintScores taint_weight(const TxGraph& graph, NodeId root, ValueMode mode,
                         std::uint32_t sweeps = 1);

/// Sum over in-neighbors of t_j, divided by the node's hop distance.
TaintScores taint_distance(const TxGraph& graph, NodeId root, std::uint32_t sweeps = 1);

enum class CombineMode { average, maximum };

/// Per-node mean or maximum of the distance and weight(out) scores.
TaintScores taint_combined(const TxGraph& graph, NodeId root, CombineMode mode,
                           std::uint32_t sweeps = 1);

/// Edge e = (u, v) is tainted iff u is reachable from the root.
struct TaintedEdgeLabels {
  NodeId root = 0;
  std::vector<std::uint8_t> edge_tainted;  // indexed by EdgeIndex
  std::vector<std::uint32_t> in_degree;
  std::vector<std::uint32_t> tainted_in_degree;
  std::vector<std::uint32_t> out_degree;
  std::vector<std::uint32_t> tainted_out_degree;
  std::vector<NodeId> reachable;  // ascending
};

TaintedEdgeLabels label_tainted_edges(const TxGraph& graph, NodeId root);

/// Starts from t_i = tainted_in / in (0 without in-edges), then applies
/// `iterations` synchronous updates t_i <- sum over in-neighbors e of
/// t_e / tainted_out_e (0 when tainted_out_e = 0). Runs on the full graph;
/// scores are not capped.
TaintScores taint_pagerank(const TxGraph& graph, const TaintedEdgeLabels& labels,
                           std::uint32_t iterations);

struct TaintOptions {
  std::uint32_t sweeps = 1;
  std::uint32_t iterations = 1;
};

TaintScores compute_taint(const TxGraph& graph, NodeId root, TaintMethod method,
                          const TaintOptions& options = {});

}  // namespace taintrank
