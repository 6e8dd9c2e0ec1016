#include "taintrank/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "taintrank/error.hpp"
#include "taintrank/ingest.hpp"
#include "taintrank/taint.hpp"

namespace taintrank {

namespace {

constexpr double kOneSatoshi = 1.0 - 1e-9;

/// Collects labels and edges for a TxGraph.
class Layout {
 public:
  NodeId node(std::string label) {
    labels_.push_back(std::move(label));
    return static_cast<NodeId>(labels_.size() - 1);
  }
  void edge(NodeId src, NodeId dst, Satoshi weight) { edges_.push_back(Edge{src, dst, weight, 1}); }
  TxGraph finish() { return TxGraph(std::move(labels_), std::move(edges_)); }

 private:
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError("scenario: " + message);
}

TxGraph long_chain(const ScenarioSpec& spec) {
  require(spec.length >= 1, "length must be positive");
  require(spec.amount >= 1, "amount must be at least 1 satoshi");
  Layout g;
  NodeId prev = g.node("thief");
  for (std::uint32_t k = 1; k <= spec.length; ++k) {
    NodeId next = g.node("hop_" + std::to_string(k));
    g.edge(prev, next, spec.amount);
    prev = next;
  }
  return g.finish();
}

TxGraph peel_chain(const ScenarioSpec& spec) {
  require(spec.length >= 1, "length must be positive");
  require(spec.peel >= 1, "peel must be at least 1 satoshi");
  require(spec.amount / spec.length > spec.peel, "amount must exceed length * peel");
  Layout g;
  NodeId holder = g.node("thief");
  Satoshi remaining = spec.amount;
  for (std::uint32_t k = 1; k <= spec.length; ++k) {
    NodeId peeled = g.node("peel_" + std::to_string(k));
    NodeId next = g.node("chain_" + std::to_string(k));
    remaining -= spec.peel;
    g.edge(holder, peeled, spec.peel);
    g.edge(holder, next, remaining);
    holder = next;
  }
  return g.finish();
}

TxGraph fan_out_fan_in(const ScenarioSpec& spec) {
  require(spec.splits >= 1, "splits must be positive");
  require(spec.rejoin >= 1 && spec.rejoin <= spec.splits, "rejoin must be in [1, splits]");
  require(spec.hops >= 1, "hops must be positive");
  require(spec.amount >= spec.splits, "amount must give every split at least 1 satoshi");
  Layout g;
  NodeId thief = g.node("thief");
  std::vector<NodeId> rejoin;
  for (std::uint32_t r = 0; r < spec.rejoin; ++r) rejoin.push_back(g.node("rejoin_" + std::to_string(r + 1)));
  const std::vector<Satoshi> ones(spec.splits, 1);
  const auto parts = apportion(spec.amount, ones);
  for (std::uint32_t s = 0; s < spec.splits; ++s) {
    const std::string tag = std::to_string(s + 1);
    NodeId at = g.node("split_" + tag);
    g.edge(thief, at, parts[s]);
    for (std::uint32_t h = 1; h < spec.hops; ++h) {
      NodeId relay = g.node("relay_" + tag + "_" + std::to_string(h));
      g.edge(at, relay, parts[s]);
      at = relay;
    }
    g.edge(at, rejoin[s % spec.rejoin], parts[s]);
  }
  return g.finish();
}

TxGraph dust_attack(const ScenarioSpec& spec) {
  require(spec.victims >= 1, "victims must be positive");
  require(spec.dust >= 1, "dust must be at least 1 satoshi");
  require(spec.amount / spec.victims > spec.dust, "amount must exceed victims * dust");
  Layout g;
  NodeId thief = g.node("thief");
  NodeId cashout = g.node("cashout");
  g.edge(thief, cashout, spec.amount - spec.dust * spec.victims);
  std::optional<NodeId> exchange;
  if (spec.clean > 0) exchange = g.node("exchange");
  for (std::uint32_t v = 1; v <= spec.victims; ++v) {
    NodeId victim = g.node("victim_" + std::to_string(v));
    g.edge(thief, victim, spec.dust);
    if (exchange) g.edge(*exchange, victim, spec.clean);
  }
  return g.finish();
}

TxGraph random_graph(const ScenarioSpec& spec, bool acyclic) {
  require(spec.nodes >= 2, "random graphs need at least 2 nodes");
  require(spec.max_weight >= 1, "max_weight must be at least 1 satoshi");
  const std::uint64_t n = spec.nodes;
  const std::uint64_t max_pairs = acyclic ? n * (n - 1) / 2 : n * (n - 1);
  require(spec.edges <= max_pairs, "more edges requested than distinct node pairs");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<Satoshi> weight(1, spec.max_weight);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (2 * spec.edges > max_pairs) {
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = acyclic ? u + 1 : 0; v < n; ++v)
        if (u != v) pairs.emplace_back(u, v);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(spec.edges);
  } else {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(spec.edges * 2);
    while (pairs.size() < spec.edges) {
      NodeId u = pick(rng), v = pick(rng);
      if (u == v) continue;
      if (acyclic && u > v) std::swap(u, v);
      if (taken.insert((static_cast<std::uint64_t>(u) << 32) | v).second) pairs.emplace_back(u, v);
    }
  }

  std::vector<std::string> labels(n);
  for (std::uint64_t i = 0; i < n; ++i) labels[i] = "n" + std::to_string(i);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back(Edge{u, v, weight(rng), 1});
  return TxGraph(std::move(labels), std::move(edges));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() ||
      value > std::numeric_limits<T>::max())
    throw DomainError("scenario: invalid value for '" + std::string(key) + "': " + std::string(text));
  return static_cast<T>(value);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::peel_chain: return "peel_chain";
    case ScenarioKind::fan_out_fan_in: return "fan_out_fan_in";
    case ScenarioKind::long_chain: return "long_chain";
    case ScenarioKind::dust_attack: return "dust_attack";
    case ScenarioKind::random_dag: return "random_dag";
    case ScenarioKind::random_cyclic: return "random_cyclic";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::peel_chain, ScenarioKind::fan_out_fan_in, ScenarioKind::long_chain,
                 ScenarioKind::dust_attack, ScenarioKind::random_dag, ScenarioKind::random_cyclic})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

ScenarioSpec parse_scenario_config(std::istream& in) {
  ScenarioSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = line;
    row = trim(row.substr(0, row.find('#')));
    if (row.empty()) continue;
    const auto eq = row.find('=');
    if (eq == std::string_view::npos)
      throw DomainError("scenario: line " + std::to_string(lineno) + " is not key = value");
    const auto key = trim(row.substr(0, eq));
    const auto value = trim(row.substr(eq + 1));
    if (key == "kind") {
      auto kind = parse_scenario_kind(value);
      if (!kind) throw DomainError("scenario: unknown kind '" + std::string(value) + "'");
      spec.kind = *kind;
    } else if (key == "length") spec.length = parse_number<std::uint32_t>(key, value);
    else if (key == "splits") spec.splits = parse_number<std::uint32_t>(key, value);
    else if (key == "rejoin") spec.rejoin = parse_number<std::uint32_t>(key, value);
    else if (key == "hops") spec.hops = parse_number<std::uint32_t>(key, value);
    else if (key == "victims") spec.victims = parse_number<std::uint32_t>(key, value);
    else if (key == "amount") spec.amount = parse_number<Satoshi>(key, value);
    else if (key == "peel") spec.peel = parse_number<Satoshi>(key, value);
    else if (key == "dust") spec.dust = parse_number<Satoshi>(key, value);
    else if (key == "clean") spec.clean = parse_number<Satoshi>(key, value);
    else if (key == "nodes") spec.nodes = parse_number<std::uint32_t>(key, value);
    else if (key == "edges") spec.edges = parse_number<std::uint64_t>(key, value);
    else if (key == "max_weight") spec.max_weight = parse_number<Satoshi>(key, value);
    else if (key == "seed") spec.seed = parse_number<std::uint64_t>(key, value);
    else throw DomainError("scenario: unknown key '" + std::string(key) + "'");
  }
  return spec;
}

std::vector<double> trace_stolen_value(const TxGraph& graph, NodeId root, Satoshi stolen) {
  const DistanceMap dist(graph, root);
  const auto order = dist.sweep_order();
  std::vector<double> share(graph.node_count(), 0.0);
  share[root] = 1.0;
  // Gauss-Seidel to the least fixed point; exact on DAGs once the deepest
  // chain has been covered, geometric convergence through cycles.
  for (int pass = 0; pass < 10000; ++pass) {
    double change = 0.0;
    for (std::size_t k = 1; k < order.size(); ++k) {
      const NodeId i = order[k];
      const Satoshi received = graph.node_value(i, ValueMode::in);
      double tainted = 0.0;
      for (const Arc& arc : graph.in_neighbors(i)) tainted += share[arc.neighbor] * static_cast<double>(arc.weight);
      const double next = tainted / static_cast<double>(received);
      change = std::max(change, std::abs(next - share[i]));
      share[i] = next;
    }
    if (change <= 1e-15) break;
  }
  std::vector<double> value(graph.node_count(), 0.0);
  for (NodeId n : order) value[n] = share[n] * static_cast<double>(graph.node_value(n, ValueMode::in));
  value[root] = static_cast<double>(stolen);
  return value;
}

Scenario generate(const ScenarioSpec& spec) {
  Scenario s;
  switch (spec.kind) {
    case ScenarioKind::long_chain: s.graph = long_chain(spec); break;
    case ScenarioKind::peel_chain: s.graph = peel_chain(spec); break;
    case ScenarioKind::fan_out_fan_in: s.graph = fan_out_fan_in(spec); break;
    case ScenarioKind::dust_attack: s.graph = dust_attack(spec); break;
    case ScenarioKind::random_dag: s.graph = random_graph(spec, true); break;
    case ScenarioKind::random_cyclic: s.graph = random_graph(spec, false); break;
  }
  s.root = 0;
  const bool random = spec.kind == ScenarioKind::random_dag || spec.kind == ScenarioKind::random_cyclic;
  const Satoshi stolen = random ? s.graph.node_value(s.root, ValueMode::out) : spec.amount;
  s.stolen_value = trace_stolen_value(s.graph, s.root, stolen);
  for (NodeId n = 0; n < s.graph.node_count(); ++n)
    if (n == s.root || s.stolen_value[n] >= kOneSatoshi) s.ground_truth.push_back(n);
  return s;
}

ScenarioEvaluation evaluate(const Scenario& scenario, std::span<const double> scores, std::size_t k) {
  if (scores.size() != scenario.graph.node_count()) throw DomainError("scores do not match scenario graph");
  if (k == 0) throw DomainError("evaluation needs k >= 1");
  std::vector<NodeId> order(scores.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](NodeId a, NodeId b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });

  ScenarioEvaluation eval;
  double total = 0.0;
  for (NodeId n : scenario.ground_truth) total += scenario.stolen_value[n];
  double captured = 0.0;
  for (std::size_t r = 0; r < take; ++r) {
    const NodeId n = order[r];
    if (std::binary_search(scenario.ground_truth.begin(), scenario.ground_truth.end(), n)) {
      ++eval.ground_truth_hits;
      captured += scenario.stolen_value[n];
    } else {
      ++eval.collateral;
    }
  }
  eval.captured_value_fraction = total > 0.0 ? captured / total : 0.0;
  return eval;
}

}  // namespace taintrank
