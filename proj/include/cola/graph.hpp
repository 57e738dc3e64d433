#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cola/types.hpp"

namespace cola {

/// Undirected attributed network in CSR form.
///
/// Every edge is stored in both directions, column indices within a row are
/// sorted and unique, and self-loops are never stored. Attributes are a dense
/// row-major n x f matrix. Instances are immutable once built and can be read
/// from any number of threads.
class AttributedGraph {
public:
  using Edge = std::pair<NodeId, NodeId>;

  AttributedGraph() = default;

  /// Builds from an arbitrary edge list. Edges are symmetrized and
  /// deduplicated; self-loops are dropped. Throws std::invalid_argument on
  /// ids outside [0, n) or when the attribute row count differs from n.
  static AttributedGraph from_edges(Index n, std::span<const Edge> edges, RowMatrixXd attributes,
                                    std::optional<Labels> labels = std::nullopt);

  /// Adopts CSR arrays verbatim after validating every structural invariant.
  static AttributedGraph from_csr(std::vector<std::int64_t> offsets, std::vector<NodeId> columns,
                                  RowMatrixXd attributes, std::optional<Labels> labels = std::nullopt);

  Index node_count() const noexcept { return static_cast<Index>(offsets_.empty() ? 0 : offsets_.size() - 1); }
  Index attribute_dim() const noexcept { return attributes_.cols(); }
  /// Undirected edge count m.
  std::int64_t edge_count() const noexcept { return static_cast<std::int64_t>(columns_.size() / 2); }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {columns_.data() + offsets_[v], columns_.data() + offsets_[v + 1]};
  }
  Index degree(NodeId v) const noexcept { return static_cast<Index>(offsets_[v + 1] - offsets_[v]); }
  bool has_edge(NodeId a, NodeId b) const noexcept;

  const std::vector<std::int64_t>& offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& columns() const noexcept { return columns_; }
  const RowMatrixXd& attributes() const noexcept { return attributes_; }
  auto attribute_row(NodeId v) const { return attributes_.row(v); }

  const std::optional<Labels>& labels() const noexcept { return labels_; }
  AttributedGraph with_labels(Labels labels) const;
  AttributedGraph with_attributes(RowMatrixXd attributes) const;

  /// Undirected edge list with a < b, in CSR order.
  std::vector<Edge> edge_list() const;

  /// Bytes held by the CSR arrays, attributes and labels.
  std::size_t storage_bytes() const noexcept;

  friend bool operator==(const AttributedGraph& a, const AttributedGraph& b);

private:
  void validate() const;

  std::vector<std::int64_t> offsets_{0};
  std::vector<NodeId> columns_;
  RowMatrixXd attributes_;
  std::optional<Labels> labels_;
};

struct GraphStats {
  Index n = 0;
  std::int64_t m = 0;
  Index f = 0;
  double mean_degree = 0.0;
};

GraphStats graph_stats(const AttributedGraph& g);

/// Dense view of the subgraph induced by `nodes`, in the given order.
///
/// Duplicate ids are allowed: copies are separate rows that share
/// attributes and are never adjacent to each other.
struct Subgraph {
  MatrixXd adjacency;
  RowMatrixXd features;
};

Subgraph induced_subgraph(const AttributedGraph& g, std::span<const NodeId> nodes);
MatrixXd induced_adjacency(const AttributedGraph& g, std::span<const NodeId> nodes);

/// Symmetric GCN normalization D^-1/2 (A + I) D^-1/2, with D the degree
/// matrix of A + I. Input must be square, symmetric, with zero diagonal.
template <typename Derived>
Matrix<typename Derived::Scalar> normalize_adjacency(const Eigen::MatrixBase<Derived>& adjacency) {
  using Scalar = typename Derived::Scalar;
  const Index c = adjacency.rows();
  if (adjacency.cols() != c) throw std::invalid_argument("normalize_adjacency: matrix is not square");
  if (adjacency != adjacency.transpose())
    throw std::invalid_argument("normalize_adjacency: adjacency is not symmetric");
  for (Index i = 0; i < c; ++i)
    if (adjacency(i, i) != Scalar(0)) throw std::invalid_argument("normalize_adjacency: nonzero diagonal");

  Matrix<Scalar> tilde = adjacency;
  tilde.diagonal().array() += Scalar(1);
  const Vector<Scalar> inv_sqrt = tilde.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

/// Scales every nonzero attribute row to unit L2 norm.
RowMatrixXd row_l2_normalized(const RowMatrixXd& attributes);

}  // namespace cola
