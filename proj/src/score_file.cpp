#include "taintrank/score_file.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "taintrank/error.hpp"

namespace taintrank {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_scores(std::ostream& out, const TxGraph& graph, const TaintScores& scores,
                  std::string_view pairing) {
  if (scores.scores.size() != graph.node_count())
    throw DomainError("score table does not match the graph");
  out << "# method=" << to_string(scores.method) << " root=" << graph.label(scores.root)
      << " iterations=" << scores.iterations << " sweeps=" << scores.sweeps
      << " pairing=" << pairing << '\n';
  std::vector<NodeId> order(graph.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  const auto& s = scores.scores;
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return s[a] > s[b]; });
  for (NodeId n : order)
    out << n << '\t' << graph.label(n) << '\t' << format_double(s[n]) << '\n';
}

ScoreFile read_scores(std::istream& in) {
  ScoreFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream header(line.substr(1));
      std::string token;
      while (header >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "bad header token '" + token + "'");
        file.meta[token.substr(0, eq)] = token.substr(eq + 1);
      }
      continue;
    }
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(lineno, "score row needs three fields");
    ScoreRow row;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + t1, row.node);
    auto r2 = std::from_chars(b + t2 + 1, b + line.size(), row.score);
    if (r1.ec != std::errc{} || r1.ptr != b + t1 || r2.ec != std::errc{} ||
        r2.ptr != b + line.size())
      throw ParseError(lineno, "bad node id or score");
    row.label = line.substr(t1 + 1, t2 - t1 - 1);
    file.rows.push_back(std::move(row));
  }
  return file;
}

namespace {

template <typename T, typename Get>
std::vector<T> densify(const std::vector<ScoreRow>& rows, Get get) {
  std::vector<T> out(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    if (r.node >= rows.size() || seen[r.node])
      throw ParseError(0, "score file node ids are not dense");
    seen[r.node] = true;
    out[r.node] = get(r);
  }
  return out;
}

}  // namespace

std::vector<double> ScoreFile::dense_scores() const {
  return densify<double>(rows, [](const ScoreRow& r) { return r.score; });
}

std::vector<std::string> ScoreFile::dense_labels() const {
  return densify<std::string>(rows, [](const ScoreRow& r) { return r.label; });
}

}  // namespace taintrank
