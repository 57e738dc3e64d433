#pragma once

#include <cstdint>
#include <vector>

#include "cola/graph.hpp"

namespace cola {

struct InjectionConfig {
  Index clique_size = 15;   ///< p
  Index clique_count = 5;   ///< q
  Index candidates = 50;    ///< k, donor candidates per contextual anomaly
  std::uint64_t seed = 0;

  void validate(Index n) const;
};

struct ContextualSwap {
  NodeId target;
  NodeId donor;
  std::vector<NodeId> candidates;  ///< the k nodes the donor was chosen from
};

/// A perturbed graph plus ground truth. `labels` marks every anomaly of
/// either kind; the graph carries the same vector.
struct InjectionResult {
  AttributedGraph graph;
  Labels labels;
  std::vector<std::vector<NodeId>> cliques;
  std::vector<ContextualSwap> swaps;
};

/// q cliques of p nodes each, members drawn without replacement from nodes
/// not yet marked in `labels` (all nodes when empty). Edges are only added.
InjectionResult inject_structural(const AttributedGraph& g, Index p, Index q, Rng& rng, Labels labels = {});

/// `count` contextual anomalies: each target is drawn from unmarked nodes, k
/// candidates are drawn from the other nodes, and the target's attribute row
/// is overwritten with a copy of the candidate row farthest from it in
/// Euclidean distance. Edges are unchanged.
InjectionResult inject_contextual(const AttributedGraph& g, Index count, Index k, Rng& rng, Labels labels = {});

/// Structural then contextual (count = p*q), giving 2pq disjoint anomalies.
InjectionResult inject_combined(const AttributedGraph& g, const InjectionConfig& cfg, Rng& rng);
InjectionResult inject_combined(const AttributedGraph& g, const InjectionConfig& cfg);

}  // namespace cola
