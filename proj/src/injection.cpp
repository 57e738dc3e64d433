#include "cola/injection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cola {

namespace {

Labels normalized_labels(Labels labels, Index n) {
  if (labels.empty()) return Labels(static_cast<std::size_t>(n), 0);
  if (static_cast<Index>(labels.size()) != n) throw std::invalid_argument("injection: label vector has wrong length");
  return labels;
}

std::vector<NodeId> unmarked_nodes(const Labels& labels) {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (!labels[v]) out.push_back(static_cast<NodeId>(v));
  return out;
}

// Moves `count` uniformly chosen entries of pool to its tail and returns
// them in draw order; the remaining pool keeps the front.
std::vector<NodeId> draw_without_replacement(std::vector<NodeId>& pool, Index count, Rng& rng) {
  std::vector<NodeId> drawn;
  drawn.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t j = pick(rng);
    drawn.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return drawn;
}

}  // namespace

void InjectionConfig::validate(Index n) const {
  if (clique_size < 2) throw std::invalid_argument("injection: clique size p must be >= 2");
  if (clique_count < 0) throw std::invalid_argument("injection: clique count q must be >= 0");
  if (candidates < 1) throw std::invalid_argument("injection: candidate count k must be >= 1");
  if (2 * clique_size * clique_count > n)
    throw std::invalid_argument("injection: 2pq = " + std::to_string(2 * clique_size * clique_count) +
                                " anomalies exceed node count " + std::to_string(n));
  if (clique_count > 0 && candidates > n - 1) throw std::invalid_argument("injection: k must be <= n - 1");
}

InjectionResult inject_structural(const AttributedGraph& g, Index p, Index q, Rng& rng, Labels labels) {
  const Index n = g.node_count();
  if (p < 2) throw std::invalid_argument("inject_structural: p must be >= 2");
  if (q < 0) throw std::invalid_argument("inject_structural: q must be >= 0");
  labels = normalized_labels(std::move(labels), n);
  auto pool = unmarked_nodes(labels);
  if (static_cast<Index>(pool.size()) < p * q)
    throw std::invalid_argument("inject_structural: need " + std::to_string(p * q) + " unmarked nodes, have " +
                                std::to_string(pool.size()));

  InjectionResult result;
  auto edges = g.edge_list();
  for (Index c = 0; c < q; ++c) {
    auto members = draw_without_replacement(pool, p, rng);
    for (std::size_t a = 0; a < members.size(); ++a) {
      labels[members[a]] = 1;
      for (std::size_t b = a + 1; b < members.size(); ++b) edges.emplace_back(members[a], members[b]);
    }
    result.cliques.push_back(std::move(members));
  }
  result.graph = AttributedGraph::from_edges(n, edges, g.attributes(), labels);
  result.labels = std::move(labels);
  return result;
}

InjectionResult inject_contextual(const AttributedGraph& g, Index count, Index k, Rng& rng, Labels labels) {
  const Index n = g.node_count();
  if (count < 0) throw std::invalid_argument("inject_contextual: count must be >= 0");
  labels = normalized_labels(std::move(labels), n);
  auto pool = unmarked_nodes(labels);
  if (static_cast<Index>(pool.size()) < count)
    throw std::invalid_argument("inject_contextual: need " + std::to_string(count) + " unmarked nodes, have " +
                                std::to_string(pool.size()));
  if (count > 0 && (k < 1 || k > n - 1)) throw std::invalid_argument("inject_contextual: k must be in [1, n-1]");

  InjectionResult result;
  RowMatrixXd x = g.attributes();
  std::vector<NodeId> others(static_cast<std::size_t>(n));
  for (Index i = 0; i < count; ++i) {
    const NodeId target = draw_without_replacement(pool, 1, rng).front();
    // Candidates: k distinct nodes from V \ {target}.
    std::iota(others.begin(), others.end(), 0);
    std::swap(others[target], others.back());
    others.pop_back();
    const auto candidates = draw_without_replacement(others, k, rng);
    others.resize(static_cast<std::size_t>(n));

    NodeId donor = candidates.front();
    double best = -1.0;
    for (NodeId cand : candidates) {
      const double dist = (x.row(cand) - x.row(target)).squaredNorm();
      if (dist > best) {
        best = dist;
        donor = cand;
      }
    }
    x.row(target) = x.row(donor).eval();
    labels[target] = 1;
    result.swaps.push_back({target, donor, candidates});
  }
  result.graph = AttributedGraph::from_csr(g.offsets(), g.columns(), std::move(x), labels);
  result.labels = std::move(labels);
  return result;
}

InjectionResult inject_combined(const AttributedGraph& g, const InjectionConfig& cfg, Rng& rng) {
  cfg.validate(g.node_count());
  auto structural = inject_structural(g, cfg.clique_size, cfg.clique_count, rng);
  auto contextual = inject_contextual(structural.graph, cfg.clique_size * cfg.clique_count, cfg.candidates, rng,
                                      structural.labels);
  contextual.cliques = std::move(structural.cliques);
  return contextual;
}

InjectionResult inject_combined(const AttributedGraph& g, const InjectionConfig& cfg) {
  Rng rng = make_stream(cfg.seed, 0);
  return inject_combined(g, cfg, rng);
}

}  // namespace cola
