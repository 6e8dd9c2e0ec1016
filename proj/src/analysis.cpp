#include "taintrank/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "taintrank/error.hpp"
#include "taintrank/score_file.hpp"

namespace taintrank {

DegreeStats degree_distribution(const TxGraph& graph) {
  DegreeStats stats;
  stats.nodes = graph.node_count();
  stats.links = graph.edge_count();
  stats.average_degree = graph.average_degree();
  for (NodeId n = 0; n < graph.node_count(); ++n) {
    ++stats.in_counts[graph.in_degree(n)];
    ++stats.out_counts[graph.out_degree(n)];
  }
  return stats;
}

std::vector<DegreeRow> degree_rows(const DegreeStats& stats) {
  std::vector<DegreeRow> rows;
  const double n = static_cast<double>(stats.nodes);
  for (auto [degree, count] : stats.in_counts)
    rows.push_back(DegreeRow{"in", degree, count, static_cast<double>(count) / n});
  for (auto [degree, count] : stats.out_counts)
    rows.push_back(DegreeRow{"out", degree, count, static_cast<double>(count) / n});
  return rows;
}

std::vector<RankedNode> top_k(std::span<const double> scores,
                              std::span<const std::string> labels, std::size_t k) {
  if (k == 0) throw DomainError("top-k needs k >= 1");
  if (labels.size() != scores.size()) throw DomainError("labels and scores differ in size");
  std::vector<NodeId> order(scores.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](NodeId a, NodeId b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<RankedNode> ranked;
  ranked.reserve(take);
  for (std::size_t r = 0; r < take; ++r)
    ranked.push_back(RankedNode{r + 1, order[r], labels[order[r]], scores[order[r]]});
  return ranked;
}

std::vector<RankedNode> top_k(const TxGraph& graph, const TaintScores& scores, std::size_t k) {
  return top_k(scores.scores, graph.labels(), k);
}

std::string_view to_string(BinScale scale) { return scale == BinScale::log ? "log" : "linear"; }

std::optional<BinScale> parse_bin_scale(std::string_view text) {
  if (text == "log") return BinScale::log;
  if (text == "linear") return BinScale::linear;
  return std::nullopt;
}

std::size_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), zero_count);
}

Histogram score_histogram(std::span<const double> scores, BinScale scale, std::size_t bin_count) {
  if (bin_count == 0) throw DomainError("histogram needs at least one bin");
  for (double s : scores)
    if (!std::isfinite(s)) throw DomainError("histogram of non-finite score");

  Histogram h;
  h.scale = scale;
  h.counts.assign(bin_count, 0);

  const bool log = scale == BinScale::log;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double s : scores) {
    if (log && s <= 0.0) continue;
    lo = any ? std::min(lo, s) : s;
    hi = any ? std::max(hi, s) : s;
    any = true;
  }
  if (!any) {
    lo = log ? 1.0 : 0.0;
    hi = lo;
  }
  // Degenerate range: one bin of unit width (linear) or one decade (log).
  if (hi == lo) hi = log ? lo * 10.0 : lo + 1.0;

  const double a = log ? std::log(lo) : lo;
  const double b = log ? std::log(hi) : hi;
  h.edges.resize(bin_count + 1);
  for (std::size_t i = 0; i <= bin_count; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(bin_count);
    h.edges[i] = log ? std::exp(x) : x;
  }
  h.edges.front() = lo;
  h.edges.back() = hi;

  for (double s : scores) {
    if (log && s <= 0.0) {
      ++h.zero_count;
      continue;
    }
    const double x = log ? std::log(s) : s;
    auto idx = static_cast<std::ptrdiff_t>(std::floor((x - a) / (b - a) * static_cast<double>(bin_count)));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bin_count) - 1);
    // Settle rounding at bin boundaries against the stored edges.
    while (idx > 0 && s < h.edges[static_cast<std::size_t>(idx)]) --idx;
    while (static_cast<std::size_t>(idx) + 1 < bin_count &&
           s >= h.edges[static_cast<std::size_t>(idx) + 1])
      ++idx;
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

std::optional<std::size_t> knee_rank(std::span<const double> scores) {
  std::vector<double> positive;
  for (double s : scores)
    if (s > 0.0) positive.push_back(s);
  if (positive.size() < 2) return std::nullopt;
  std::sort(positive.begin(), positive.end(), std::greater<>());
  std::size_t best = 0;
  double best_drop = -1.0;
  for (std::size_t i = 0; i + 1 < positive.size(); ++i) {
    const double drop = std::log(positive[i]) - std::log(positive[i + 1]);
    if (drop > best_drop) {
      best_drop = drop;
      best = i;
    }
  }
  return best + 1;
}

void write_degree_csv(std::ostream& out, const DegreeStats& stats) {
  out << "direction,degree,count,fraction\n";
  for (const auto& row : degree_rows(stats))
    out << row.direction << ',' << row.degree << ',' << row.count << ','
        << format_double(row.fraction) << '\n';
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
  out << "bin_lo,bin_hi,count\n";
  if (histogram.scale == BinScale::log) out << "0,0," << histogram.zero_count << '\n';
  for (std::size_t b = 0; b < histogram.counts.size(); ++b)
    out << format_double(histogram.edges[b]) << ',' << format_double(histogram.edges[b + 1])
        << ',' << histogram.counts[b] << '\n';
}

void write_topk_csv(std::ostream& out, std::span<const RankedNode> ranked) {
  out << "rank,label,score\n";
  for (const auto& r : ranked) out << r.rank << ',' << r.label << ',' << format_double(r.score) << '\n';
}

}  // namespace taintrank
