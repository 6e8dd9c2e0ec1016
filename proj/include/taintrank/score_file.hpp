#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "taintrank/graph.hpp"
#include "taintrank/taint.hpp"

namespace taintrank {

// Score file layout:
//   # method=<m> root=<label> iterations=<n> sweeps=<n> pairing=<rule>
//   node_id<TAB>label<TAB>score
// Rows are sorted by descending score, ties by ascending node id. Scores
// use the shortest decimal form that round-trips to the same double.

void write_scores(std::ostream& out, const TxGraph& graph, const TaintScores& scores,
                  std::string_view pairing);

struct ScoreRow {
  NodeId node = 0;
  std::string label;
  double score = 0.0;
};

struct ScoreFile {
  std::map<std::string, std::string> meta;
  std::vector<ScoreRow> rows;

  /// Scores indexed by node id (ids must be dense).
  std::vector<double> dense_scores() const;
  std::vector<std::string> dense_labels() const;
};

/// Throws ParseError on malformed content.
ScoreFile read_scores(std::istream& in);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace taintrank
