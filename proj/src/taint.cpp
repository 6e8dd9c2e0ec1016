#include "taintrank/taint.hpp"

#include <algorithm>

#include "taintrank/error.hpp"

namespace taintrank {

namespace {

void require_root(const TxGraph& graph, NodeId root) {
  if (!graph.contains(root))
    throw DomainError("root id " + std::to_string(root) + " is not in the graph");
}

void require_sweeps(std::uint32_t sweeps) {
  if (sweeps == 0) throw DomainError("sweeps must be positive");
}

TaintScores blank(const TxGraph& graph, const DistanceMap& dist, TaintMethod method,
                  std::uint32_t sweeps) {
  TaintScores s;
  s.method = method;
  s.root = dist.root();
  s.sweeps = sweeps;
  s.scores.assign(graph.node_count(), 0.0);
  s.scores[dist.root()] = 1.0;
  s.reachable = dist.reachable_nodes();
  return s;
}

// Shared Gauss-Seidel pass over the sweep order. `term(j, arc)` is the
// contribution of in-neighbor j; `finish(i, sum)` turns the sum into t_i.
template <typename Term, typename Finish>
void sweep(const TxGraph& graph, const DistanceMap& dist, std::vector<double>& t,
           std::uint32_t sweeps, Term term, Finish finish) {
  const auto order = dist.sweep_order();
  for (std::uint32_t pass = 0; pass < sweeps; ++pass) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const NodeId i = order[k];
      double sum = 0.0;
      for (const Arc& arc : graph.in_neighbors(i)) {
        if (!dist.reachable(arc.neighbor)) continue;
        sum += term(arc);
      }
      t[i] = finish(i, sum);
    }
  }
}

}  // namespace

std::string_view to_string(TaintMethod method) {
  switch (method) {
    case TaintMethod::fixed: return "fixed";
    case TaintMethod::weight_in: return "weight_in";
    case TaintMethod::weight_out: return "weight_out";
    case TaintMethod::distance: return "distance";
    case TaintMethod::combined_avg: return "combined_avg";
    case TaintMethod::combined_max: return "combined_max";
    case TaintMethod::pagerank_like: return "pagerank_like";
  }
  return "?";
}

std::optional<TaintMethod> parse_method(std::string_view text) {
  for (TaintMethod m : kAllMethods)
    if (to_string(m) == text) return m;
  return std::nullopt;
}

DistanceMap::DistanceMap(const TxGraph& graph, NodeId root)
    : root_(root), hops_(graph.node_count(), kUnreachable) {
  require_root(graph, root);
  // Level-synchronous BFS; each level is sorted so the order is (distance, id).
  hops_[root] = 0;
  order_.push_back(root);
  std::size_t level_begin = 0;
  while (level_begin < order_.size()) {
    const std::size_t level_end = order_.size();
    for (std::size_t k = level_begin; k < level_end; ++k) {
      const NodeId u = order_[k];
      for (const Arc& arc : graph.out_neighbors(u)) {
        if (hops_[arc.neighbor] != kUnreachable) continue;
        hops_[arc.neighbor] = hops_[u] + 1;
        order_.push_back(arc.neighbor);
      }
    }
    std::sort(order_.begin() + static_cast<std::ptrdiff_t>(level_end), order_.end());
    if (order_.size() > level_end) max_ = hops_[order_.back()];
    level_begin = level_end;
  }
}

std::vector<NodeId> DistanceMap::reachable_nodes() const {
  std::vector<NodeId> nodes(order_.begin(), order_.end());
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

ReachableSubgraph reachable_subgraph(const TxGraph& graph, NodeId root) {
  DistanceMap dist(graph, root);
  ReachableSubgraph sub;
  sub.nodes = dist.reachable_nodes();
  sub.graph = graph.induced_subgraph(sub.nodes);
  return sub;
}

TaintScores taint_fixed(const TxGraph& graph, NodeId root) {
  DistanceMap dist(graph, root);
  TaintScores s = blank(graph, dist, TaintMethod::fixed, 1);
  for (NodeId n : s.reachable) s.scores[n] = 1.0;
  return s;
}

TaintScores taint_weight(const TxGraph& graph, NodeId root, ValueMode mode,
                         std::uint32_t sweeps) {
  require_sweeps(sweeps);
  DistanceMap dist(graph, root);
  TaintScores s = blank(graph, dist,
                        mode == ValueMode::in ? TaintMethod::weight_in : TaintMethod::weight_out,
                        sweeps);
  auto& t = s.scores;
  sweep(
      graph, dist, t, sweeps,
      [&](const Arc& arc) {
        const Satoshi value = graph.node_value(arc.neighbor, mode);
        if (value == 0) return 0.0;
        return t[arc.neighbor] * static_cast<double>(arc.weight) / static_cast<double>(value);
      },
      [](NodeId, double sum) { return sum; });
  return s;
}

TaintScores taint_distance(const TxGraph& graph, NodeId root, std::uint32_t sweeps) {
  require_sweeps(sweeps);
  DistanceMap dist(graph, root);
  TaintScores s = blank(graph, dist, TaintMethod::distance, sweeps);
  auto& t = s.scores;
  sweep(
      graph, dist, t, sweeps, [&](const Arc& arc) { return t[arc.neighbor]; },
      [&](NodeId i, double sum) { return sum / static_cast<double>(dist[i]); });
  return s;
}

TaintScores taint_combined(const TxGraph& graph, NodeId root, CombineMode mode,
                           std::uint32_t sweeps) {
  TaintScores by_distance = taint_distance(graph, root, sweeps);
  const TaintScores by_weight = taint_weight(graph, root, ValueMode::out, sweeps);
  TaintScores s = std::move(by_distance);
  s.method = mode == CombineMode::average ? TaintMethod::combined_avg : TaintMethod::combined_max;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    const double a = s.scores[i];
    const double b = by_weight.scores[i];
    s.scores[i] = mode == CombineMode::average ? (a + b) / 2.0 : std::max(a, b);
  }
  return s;
}

TaintedEdgeLabels label_tainted_edges(const TxGraph& graph, NodeId root) {
  DistanceMap dist(graph, root);
  const std::size_t n = graph.node_count();
  TaintedEdgeLabels labels;
  labels.root = root;
  labels.reachable = dist.reachable_nodes();
  labels.edge_tainted.assign(graph.edge_count(), 0);
  labels.in_degree.assign(n, 0);
  labels.tainted_in_degree.assign(n, 0);
  labels.out_degree.assign(n, 0);
  labels.tainted_out_degree.assign(n, 0);
  const auto edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const bool tainted = dist.reachable(edge.src);
    labels.edge_tainted[e] = tainted;
    ++labels.out_degree[edge.src];
    ++labels.in_degree[edge.dst];
    if (tainted) {
      ++labels.tainted_out_degree[edge.src];
      ++labels.tainted_in_degree[edge.dst];
    }
  }
  return labels;
}

TaintScores taint_pagerank(const TxGraph& graph, const TaintedEdgeLabels& labels,
                           std::uint32_t iterations) {
  const std::size_t n = graph.node_count();
  require_root(graph, labels.root);
  if (labels.in_degree.size() != n || labels.edge_tainted.size() != graph.edge_count())
    throw DomainError("tainted-edge labels do not belong to this graph");

  TaintScores s;
  s.method = TaintMethod::pagerank_like;
  s.root = labels.root;
  s.iterations = iterations;
  s.sweeps = 1;
  s.reachable = labels.reachable;
  s.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (labels.in_degree[i] > 0)
      s.scores[i] = static_cast<double>(labels.tainted_in_degree[i]) /
                    static_cast<double>(labels.in_degree[i]);

  std::vector<double> next(n);
  for (std::uint32_t it = 0; it < iterations; ++it) {
    for (NodeId i = 0; i < n; ++i) {
      double sum = 0.0;
      for (const Arc& arc : graph.in_neighbors(i)) {
        const std::uint32_t spread = labels.tainted_out_degree[arc.neighbor];
        if (spread == 0) continue;
        sum += s.scores[arc.neighbor] / static_cast<double>(spread);
      }
      next[i] = sum;
    }
    s.scores.swap(next);
  }
  return s;
}

TaintScores compute_taint(const TxGraph& graph, NodeId root, TaintMethod method,
                          const TaintOptions& options) {
  switch (method) {
    case TaintMethod::fixed: return taint_fixed(graph, root);
    case TaintMethod::weight_in: return taint_weight(graph, root, ValueMode::in, options.sweeps);
    case TaintMethod::weight_out:
      return taint_weight(graph, root, ValueMode::out, options.sweeps);
    case TaintMethod::distance: return taint_distance(graph, root, options.sweeps);
    case TaintMethod::combined_avg:
      return taint_combined(graph, root, CombineMode::average, options.sweeps);
    case TaintMethod::combined_max:
      return taint_combined(graph, root, CombineMode::maximum, options.sweeps);
    case TaintMethod::pagerank_like:
      return taint_pagerank(graph, label_tainted_edges(graph, root), options.iterations);
  }
  throw DomainError("unknown taint method");
}

}  // namespace taintrank
