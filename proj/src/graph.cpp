#include "cola/graph.hpp"

#include <algorithm>
#include <string>

namespace cola {

AttributedGraph AttributedGraph::from_edges(Index n, std::span<const Edge> edges, RowMatrixXd attributes,
                                            std::optional<Labels> labels) {
  if (n < 0) throw std::invalid_argument("from_edges: negative node count");
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("from_edges: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                  ") out of range for n=" + std::to_string(n));
    if (a == b) continue;
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::vector<NodeId> columns;
  columns.reserve(directed.size());
  for (const auto& [a, b] : directed) {
    ++offsets[static_cast<std::size_t>(a) + 1];
    columns.push_back(b);
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  return from_csr(std::move(offsets), std::move(columns), std::move(attributes), std::move(labels));
}

AttributedGraph AttributedGraph::from_csr(std::vector<std::int64_t> offsets, std::vector<NodeId> columns,
                                          RowMatrixXd attributes, std::optional<Labels> labels) {
  AttributedGraph g;
  g.offsets_ = std::move(offsets);
  g.columns_ = std::move(columns);
  g.attributes_ = std::move(attributes);
  g.labels_ = std::move(labels);
  g.validate();
  return g;
}

void AttributedGraph::validate() const {
  if (offsets_.empty() || offsets_.front() != 0) throw std::invalid_argument("graph: offsets must start at 0");
  const Index n = node_count();
  if (static_cast<std::size_t>(offsets_.back()) != columns_.size())
    throw std::invalid_argument("graph: last offset does not match column count");
  if (attributes_.rows() != n)
    throw std::invalid_argument("graph: attribute rows (" + std::to_string(attributes_.rows()) +
                                ") != node count (" + std::to_string(n) + ")");
  if (n > 0 && attributes_.cols() < 1) throw std::invalid_argument("graph: attribute dimension must be >= 1");
  if (labels_ && static_cast<Index>(labels_->size()) != n)
    throw std::invalid_argument("graph: label count does not match node count");
  if (labels_)
    for (auto l : *labels_)
      if (l > 1) throw std::invalid_argument("graph: labels must be 0 or 1");
  for (Index v = 0; v < n; ++v) {
    if (offsets_[v + 1] < offsets_[v]) throw std::invalid_argument("graph: offsets must be nondecreasing");
    const auto row = neighbors(static_cast<NodeId>(v));
    for (std::size_t k = 0; k < row.size(); ++k) {
      const NodeId u = row[k];
      if (u < 0 || u >= n) throw std::invalid_argument("graph: column index out of range");
      if (u == v) throw std::invalid_argument("graph: self-loop stored");
      if (k > 0 && row[k - 1] >= u) throw std::invalid_argument("graph: row not strictly sorted");
    }
  }
  for (Index v = 0; v < n; ++v)
    for (NodeId u : neighbors(static_cast<NodeId>(v)))
      if (!has_edge(u, static_cast<NodeId>(v))) throw std::invalid_argument("graph: adjacency is not symmetric");
}

bool AttributedGraph::has_edge(NodeId a, NodeId b) const noexcept {
  const auto row = neighbors(a);
  return std::binary_search(row.begin(), row.end(), b);
}

AttributedGraph AttributedGraph::with_labels(Labels labels) const {
  return from_csr(offsets_, columns_, attributes_, std::move(labels));
}

AttributedGraph AttributedGraph::with_attributes(RowMatrixXd attributes) const {
  return from_csr(offsets_, columns_, std::move(attributes), labels_);
}

std::vector<AttributedGraph::Edge> AttributedGraph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(columns_.size() / 2);
  for (Index v = 0; v < node_count(); ++v)
    for (NodeId u : neighbors(static_cast<NodeId>(v)))
      if (v < u) out.emplace_back(static_cast<NodeId>(v), u);
  return out;
}

std::size_t AttributedGraph::storage_bytes() const noexcept {
  return offsets_.size() * sizeof(std::int64_t) + columns_.size() * sizeof(NodeId) +
         static_cast<std::size_t>(attributes_.size()) * sizeof(double) + (labels_ ? labels_->size() : 0);
}

bool operator==(const AttributedGraph& a, const AttributedGraph& b) {
  return a.offsets_ == b.offsets_ && a.columns_ == b.columns_ && a.attributes_.rows() == b.attributes_.rows() &&
         a.attributes_.cols() == b.attributes_.cols() && a.attributes_ == b.attributes_ && a.labels_ == b.labels_;
}

GraphStats graph_stats(const AttributedGraph& g) {
  GraphStats s;
  s.n = g.node_count();
  s.m = g.edge_count();
  s.f = g.attribute_dim();
  s.mean_degree = s.n > 0 ? 2.0 * static_cast<double>(s.m) / static_cast<double>(s.n) : 0.0;
  return s;
}

MatrixXd induced_adjacency(const AttributedGraph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw std::invalid_argument("induced_subgraph: empty node list");
  const Index n = g.node_count();
  for (NodeId v : nodes)
    if (v < 0 || v >= n) throw std::invalid_argument("induced_subgraph: node " + std::to_string(v) + " out of range");
  const auto c = static_cast<Index>(nodes.size());
  MatrixXd adj = MatrixXd::Zero(c, c);
  for (Index a = 0; a < c; ++a)
    for (Index b = a + 1; b < c; ++b)
      if (nodes[a] != nodes[b] && g.has_edge(nodes[a], nodes[b])) adj(a, b) = adj(b, a) = 1.0;
  return adj;
}

Subgraph induced_subgraph(const AttributedGraph& g, std::span<const NodeId> nodes) {
  Subgraph sub;
  sub.adjacency = induced_adjacency(g, nodes);
  sub.features.resize(static_cast<Index>(nodes.size()), g.attribute_dim());
  for (std::size_t a = 0; a < nodes.size(); ++a) sub.features.row(static_cast<Index>(a)) = g.attribute_row(nodes[a]);
  return sub;
}

RowMatrixXd row_l2_normalized(const RowMatrixXd& attributes) {
  RowMatrixXd out = attributes;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

}  // namespace cola
