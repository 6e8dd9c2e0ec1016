#include "taintrank/graph.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "taintrank/error.hpp"

namespace taintrank {

namespace {

void validate_label(std::string_view label) {
  if (label.empty()) throw DomainError("empty node label");
  if (label.find_first_of("\t\r\n") != std::string_view::npos)
    throw DomainError("node label contains a tab or line break: " + std::string(label));
}

std::uint64_t pair_key(NodeId src, NodeId dst) {
  return (static_cast<std::uint64_t>(src) << 32) | dst;
}

}  // namespace

TxGraph::TxGraph(std::vector<std::string> labels, std::vector<Edge> edges)
    : labels_(std::move(labels)), edges_(std::move(edges)) {
  if (labels_.size() > std::numeric_limits<NodeId>::max())
    throw DomainError("too many nodes");
  if (edges_.size() > std::numeric_limits<EdgeIndex>::max())
    throw DomainError("too many edges");

  const std::size_t n = labels_.size();
  index_.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    validate_label(labels_[i]);
    if (!index_.emplace(labels_[i], i).second)
      throw DomainError("duplicate node label: " + labels_[i]);
  }

  for (const Edge& e : edges_) {
    if (e.src >= n || e.dst >= n) throw DomainError("edge endpoint out of range");
    if (e.src == e.dst) throw DomainError("self-loop on node " + labels_[e.src]);
    if (e.weight < 1) throw DomainError("edge weight must be at least 1 satoshi");
    if (e.tx_count < 1) throw DomainError("edge tx_count must be positive");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return pair_key(a.src, a.dst) < pair_key(b.src, b.dst);
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].src == edges_[i - 1].src && edges_[i].dst == edges_[i - 1].dst)
      throw DomainError("duplicate edge " + labels_[edges_[i].src] + " -> " +
                        labels_[edges_[i].dst]);
  }

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  in_value_.assign(n, 0);
  out_value_.assign(n, 0);
  for (const Edge& e : edges_) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
    out_value_[e.src] += e.weight;
    in_value_[e.dst] += e.weight;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }

  // Edges are sorted by (src, dst), so a single pass fills both directions
  // with neighbors in ascending order.
  out_arcs_.resize(edges_.size());
  in_arcs_.resize(edges_.size());
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (EdgeIndex i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    out_arcs_[i] = Arc{e.dst, e.weight, i};
    in_arcs_[in_fill[e.dst]++] = Arc{e.src, e.weight, i};
  }
}

void TxGraph::check(NodeId n) const {
  if (!contains(n))
    throw DomainError("unknown node id " + std::to_string(n) + " (graph has " +
                      std::to_string(node_count()) + " nodes)");
}

const std::string& TxGraph::label(NodeId n) const {
  check(n);
  return labels_[n];
}

std::optional<NodeId> TxGraph::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId TxGraph::id_of(std::string_view label) const {
  if (auto id = find(label)) return *id;
  throw DomainError("unknown node label: " + std::string(label));
}

std::span<const Arc> TxGraph::out_neighbors(NodeId n) const {
  check(n);
  return std::span<const Arc>(out_arcs_).subspan(out_offsets_[n],
                                                 out_offsets_[n + 1] - out_offsets_[n]);
}

std::span<const Arc> TxGraph::in_neighbors(NodeId n) const {
  check(n);
  return std::span<const Arc>(in_arcs_).subspan(in_offsets_[n],
                                                in_offsets_[n + 1] - in_offsets_[n]);
}

Satoshi TxGraph::node_value(NodeId n, ValueMode mode) const {
  check(n);
  return mode == ValueMode::in ? in_value_[n] : out_value_[n];
}

std::optional<double> TxGraph::average_degree() const {
  return taintrank::average_degree(node_count(), edge_count());
}

TxGraph TxGraph::induced_subgraph(std::span<const NodeId> nodes) const {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> remap(node_count(), kAbsent);
  for (NodeId n : nodes) {
    check(n);
    remap[n] = 0;
  }
  std::vector<std::string> labels;
  for (NodeId n = 0; n < node_count(); ++n) {
    if (remap[n] == kAbsent) continue;
    remap[n] = static_cast<NodeId>(labels.size());
    labels.push_back(labels_[n]);
  }
  std::vector<Edge> edges;
  for (const Edge& e : edges_) {
    if (remap[e.src] != kAbsent && remap[e.dst] != kAbsent)
      edges.push_back(Edge{remap[e.src], remap[e.dst], e.weight, e.tx_count});
  }
  return TxGraph(std::move(labels), std::move(edges));
}

std::optional<double> average_degree(std::size_t nodes, std::size_t links) {
  if (nodes == 0) return std::nullopt;
  return 2.0 * static_cast<double>(links) / static_cast<double>(nodes);
}

void GraphBuilder::ensure_open() const {
  if (finalized_) throw std::logic_error("GraphBuilder used after finalize()");
}

NodeId GraphBuilder::add_node(std::string_view label) {
  ensure_open();
  if (auto it = index_.find(label); it != index_.end()) return it->second;
  validate_label(label);
  if (labels_.size() >= std::numeric_limits<NodeId>::max())
    throw DomainError("too many nodes");
  const auto id = static_cast<NodeId>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

void GraphBuilder::add_transfer(std::string_view src, std::string_view dst, Satoshi value) {
  ensure_open();
  if (value < 1) throw DomainError("transfer value must be at least 1 satoshi");
  const NodeId s = add_node(src);
  const NodeId d = add_node(dst);
  if (s == d) {
    ++self_loops_;
    return;
  }
  auto [it, inserted] = slot_.try_emplace(pair_key(s, d), edges_.size());
  if (inserted) {
    edges_.push_back(Edge{s, d, value, 1});
  } else {
    Edge& e = edges_[it->second];
    e.weight += value;
    ++e.tx_count;
  }
}

TxGraph GraphBuilder::finalize() {
  ensure_open();
  finalized_ = true;
  slot_.clear();
  index_.clear();
  return TxGraph(std::move(labels_), std::move(edges_));
}

}  // namespace taintrank
