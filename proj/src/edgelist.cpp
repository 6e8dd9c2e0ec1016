#include "taintrank/edgelist.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "taintrank/error.hpp"

namespace taintrank {

namespace {

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string_view chomp(const std::string& line) {
  std::string_view v = line;
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

}  // namespace

void write_edgelist(const TxGraph& graph, std::ostream& edges, std::ostream& labels) {
  for (const Edge& e : graph.edges())
    edges << e.src << '\t' << e.dst << '\t' << e.weight << '\t' << e.tx_count << '\n';
  for (NodeId n = 0; n < graph.node_count(); ++n) labels << n << '\t' << graph.label(n) << '\n';
}

TxGraph read_edgelist(std::istream& edges, std::istream& labels) {
  std::vector<std::string> names;
  std::vector<bool> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(labels, line)) {
    ++lineno;
    auto row = chomp(line);
    if (row.empty()) continue;
    auto tab = row.find('\t');
    if (tab == std::string_view::npos) throw ParseError(lineno, "label row needs two fields");
    auto id = parse_field<NodeId>(row.substr(0, tab), lineno, "node id");
    if (id == std::numeric_limits<NodeId>::max()) throw ParseError(lineno, "node id too large");
    if (id >= names.size()) {
      names.resize(id + 1);
      seen.resize(id + 1, false);
    }
    if (seen[id]) throw ParseError(lineno, "duplicate node id " + std::to_string(id));
    seen[id] = true;
    names[id] = std::string(row.substr(tab + 1));
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw DomainError("label file is missing node id " + std::to_string(i));

  std::vector<Edge> list;
  lineno = 0;
  while (std::getline(edges, line)) {
    ++lineno;
    auto row = chomp(line);
    if (row.empty()) continue;
    auto fields = split_tabs(row);
    if (fields.size() != 4) throw ParseError(lineno, "edge row needs four fields");
    list.push_back(Edge{parse_field<NodeId>(fields[0], lineno, "src id"),
                        parse_field<NodeId>(fields[1], lineno, "dst id"),
                        parse_field<Satoshi>(fields[2], lineno, "weight"),
                        parse_field<std::uint32_t>(fields[3], lineno, "tx_count")});
  }
  return TxGraph(std::move(names), std::move(list));
}

std::filesystem::path edges_path(const std::filesystem::path& prefix) {
  return std::filesystem::path(prefix.string() + ".edges.tsv");
}

std::filesystem::path labels_path(const std::filesystem::path& prefix) {
  return std::filesystem::path(prefix.string() + ".labels.tsv");
}

void save_graph(const TxGraph& graph, const std::filesystem::path& prefix) {
  auto edges = open_out(edges_path(prefix));
  auto labels = open_out(labels_path(prefix));
  write_edgelist(graph, edges, labels);
  if (!edges.flush() || !labels.flush()) throw IoError("write failed for " + prefix.string());
}

TxGraph load_graph(const std::filesystem::path& prefix) {
  auto edges = open_in(edges_path(prefix));
  auto labels = open_in(labels_path(prefix));
  return read_edgelist(edges, labels);
}

}  // namespace taintrank
