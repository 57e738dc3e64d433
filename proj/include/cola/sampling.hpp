#pragma once

#include <vector>

#include "cola/graph.hpp"

namespace cola {

struct SamplerOptions {
  Index subgraph_size = 4;     ///< c
  double restart_prob = 0.5;
  Index max_steps = 0;         ///< walk step cap; 0 means 64 * c
};

/// One contrastive sample: target node vs. a local subgraph grown from an
/// initial node. `sub_nodes[0]` is the initial node, whose feature row is
/// zeroed (anonymization). Positive pairs (label 1) grow from the target
/// itself, negative pairs (label 0) from some other node.
struct InstancePair {
  NodeId target = 0;
  std::vector<NodeId> sub_nodes;
  MatrixXd adjacency;          ///< c x c induced adjacency, zero diagonal
  RowMatrixXd features;        ///< c x f, row 0 zero; empty for skeleton pairs
  RowVectorXd target_features; ///< x of the target; empty for skeleton pairs
  int label = 0;

  Index size() const noexcept { return static_cast<Index>(sub_nodes.size()); }
  bool has_features() const noexcept { return features.size() > 0; }
};

/// Random walk with restart from `initial`, collecting distinct nodes in
/// visit order until c are found or the step cap is hit. Short results are
/// padded by cycling through what was collected. Index 0 is always `initial`.
std::vector<NodeId> rwr_sample(const AttributedGraph& g, NodeId initial, const SamplerOptions& opts, Rng& rng);

/// Pair without feature copies; the model can project rows itself.
InstancePair sample_positive(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng);
InstancePair sample_negative(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng);

/// Fills `features` (row 0 zeroed) and `target_features`.
void attach_features(const AttributedGraph& g, InstancePair& pair);

InstancePair make_positive_pair(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng);
InstancePair make_negative_pair(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng);

/// Random permutation of [0, n) cut into ceil(n / B) batches.
std::vector<std::vector<NodeId>> epoch_batches(Index node_count, Index batch_size, Rng& rng);

}  // namespace cola
