#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cola/graph.hpp"

namespace cola {

namespace fs = std::filesystem;

/// What the text loader saw on its way to a clean graph.
struct LoadReport {
  std::int64_t raw_edge_lines = 0;   ///< edge lines read, before symmetrize/dedup
  std::int64_t self_loops_dropped = 0;
  std::int64_t undirected_edges = 0; ///< m after symmetrize/dedup
};

struct LoadedGraph {
  AttributedGraph graph;
  LoadReport report;
};

/// Edge list (`src dst` per line, 0-indexed, '#' comments allowed), attribute
/// CSV (one row of f reals per node), optional label file (one 0/1 per line).
/// The node count is the attribute row count.
LoadedGraph load_graph(const fs::path& edge_path, const fs::path& attr_path,
                       const std::optional<fs::path>& label_path = std::nullopt);

Labels load_labels(const fs::path& path, std::optional<Index> expected_count = std::nullopt);

void save_edges(const AttributedGraph& g, const fs::path& path);
/// Shortest round-trip decimal form, so a reload reproduces the bits.
void save_attributes(const AttributedGraph& g, const fs::path& path);
void save_labels(const Labels& labels, const fs::path& path);

/// Binary cache: "COLAGRPH", u32 version, u64 n, u64 f, u64 nnz, u8 has_labels,
/// then offsets (i64 x n+1), columns (i32 x nnz), attributes (f64 x n*f,
/// row-major), labels (u8 x n). All little-endian.
void save_graph_binary(const AttributedGraph& g, const fs::path& path);
AttributedGraph load_graph_binary(const fs::path& path);

/// 64-bit FNV-1a over the file contents.
std::uint64_t file_fingerprint(const fs::path& path);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t value);

}  // namespace cola
