#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "taintrank/graph.hpp"

namespace taintrank {

enum class ScenarioKind { peel_chain, fan_out_fan_in, long_chain, dust_attack, random_dag, random_cyclic };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

/// Parameters for every kind; each kind reads only the fields it needs.
///
///   long_chain      length, amount
///   peel_chain      length, amount, peel
///   fan_out_fan_in  splits, rejoin, hops, amount
///   dust_attack     victims, dust, amount, clean
///   random_dag      nodes, edges, max_weight, seed
///   random_cyclic   nodes, edges, max_weight, seed
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::long_chain;
  std::uint32_t length = 5;
  std::uint32_t splits = 100;
  std::uint32_t rejoin = 1;
  std::uint32_t hops = 4;  // edges on each split path, ending at a rejoin node
  std::uint32_t victims = 50;
  Satoshi amount = 100 * kSatoshiPerBtc;
  Satoshi peel = kSatoshiPerBtc;
  Satoshi dust = 1;
  Satoshi clean = kSatoshiPerBtc;  // unrelated funds each dust victim already holds
  std::uint32_t nodes = 50;
  std::uint64_t edges = 100;
  Satoshi max_weight = 1000;
  std::uint64_t seed = 1;
};

/// Reads `key = value` lines ('#' starts a comment). Keys are the field
/// names above plus `kind`. Throws DomainError on unknown keys or bad values.
ScenarioSpec parse_scenario_config(std::istream& in);

struct Scenario {
  TxGraph graph;
  NodeId root = 0;
  std::vector<NodeId> ground_truth;  // ascending; nodes holding >= 1 satoshi of stolen value
  std::vector<double> stolen_value;  // satoshi, per node
};

/// Deterministic in (kind, parameters, seed). Throws DomainError for
/// parameters out of range.
Scenario generate(const ScenarioSpec& spec);

/// Stolen value reaching each node when every node passes on stolen funds in
/// proportion to the stolen share of everything it received. The root holds
/// `stolen` and is fully tainted.
std::vector<double> trace_stolen_value(const TxGraph& graph, NodeId root, Satoshi stolen);

struct ScenarioEvaluation {
  double captured_value_fraction = 0.0;  // stolen value held by top-k / total stolen value
  std::size_t ground_truth_hits = 0;
  std::size_t collateral = 0;  // top-k nodes outside the ground truth
};

ScenarioEvaluation evaluate(const Scenario& scenario, std::span<const double> scores, std::size_t k);

}  // namespace taintrank
