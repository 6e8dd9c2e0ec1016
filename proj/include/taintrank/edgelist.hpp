#pragma once

#include <filesystem>
#include <iosfwd>

#include "taintrank/graph.hpp"

namespace taintrank {

// Edgelist rows: src_id<TAB>dst_id<TAB>weight_satoshi<TAB>tx_count, sorted by
// (src_id, dst_id). Label rows: node_id<TAB>label, sorted by node_id.

void write_edgelist(const TxGraph& graph, std::ostream& edges, std::ostream& labels);

/// Throws ParseError on malformed rows and DomainError if the rows violate a
/// graph invariant (ids not dense, duplicate edges, ...).
TxGraph read_edgelist(std::istream& edges, std::istream& labels);

std::filesystem::path edges_path(const std::filesystem::path& prefix);
std::filesystem::path labels_path(const std::filesystem::path& prefix);

/// Writes <prefix>.edges.tsv and <prefix>.labels.tsv. Throws IoError.
void save_graph(const TxGraph& graph, const std::filesystem::path& prefix);
TxGraph load_graph(const std::filesystem::path& prefix);

}  // namespace taintrank
