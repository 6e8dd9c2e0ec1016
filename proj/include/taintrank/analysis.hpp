#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taintrank/graph.hpp"
#include "taintrank/taint.hpp"

namespace taintrank {

struct DegreeStats {
  std::map<std::size_t, std::size_t> in_counts;   // degree -> node count
  std::map<std::size_t, std::size_t> out_counts;
  std::size_t nodes = 0;
  std::size_t links = 0;
  std::optional<double> average_degree;  // 2L/N, absent for the empty graph
};

DegreeStats degree_distribution(const TxGraph& graph);

struct DegreeRow {
  std::string_view direction;  // "in" or "out"
  std::size_t degree = 0;
  std::size_t count = 0;
  double fraction = 0.0;
};

/// In-degree rows then out-degree rows, each by ascending degree.
std::vector<DegreeRow> degree_rows(const DegreeStats& stats);

struct RankedNode {
  std::size_t rank = 0;  // 1-based
  NodeId node = 0;
  std::string label;
  double score = 0.0;
};

/// Highest scores first, ties by ascending node id; min(k, scores.size()) entries.
std::vector<RankedNode> top_k(std::span<const double> scores,
                              std::span<const std::string> labels, std::size_t k);
std::vector<RankedNode> top_k(const TxGraph& graph, const TaintScores& scores, std::size_t k);

enum class BinScale { linear, log };

std::string_view to_string(BinScale scale);
std::optional<BinScale> parse_bin_scale(std::string_view text);

/// `counts[b]` holds scores in [edges[b], edges[b+1]); the last bin is
/// closed. Log histograms put non-positive scores in `zero_count` instead.
struct Histogram {
  BinScale scale = BinScale::linear;
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t zero_count = 0;

  std::size_t total() const noexcept;
};

Histogram score_histogram(std::span<const double> scores, BinScale scale, std::size_t bin_count);

/// Knee of a descending score curve: the number of leading scores before the
/// largest drop in log(score) between neighbors. Only positive scores take
/// part; absent with fewer than two of them. Informational only.
std::optional<std::size_t> knee_rank(std::span<const double> scores);

void write_degree_csv(std::ostream& out, const DegreeStats& stats);
void write_histogram_csv(std::ostream& out, const Histogram& histogram);
void write_topk_csv(std::ostream& out, std::span<const RankedNode> ranked);

}  // namespace taintrank
