#include "cola/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cola {

std::vector<NodeId> rwr_sample(const AttributedGraph& g, NodeId initial, const SamplerOptions& opts, Rng& rng) {
  const Index c = opts.subgraph_size;
  if (c < 1) throw std::invalid_argument("rwr_sample: subgraph size c must be >= 1");
  if (initial < 0 || initial >= g.node_count())
    throw std::invalid_argument("rwr_sample: initial node " + std::to_string(initial) + " out of range");
  if (!(opts.restart_prob >= 0.0 && opts.restart_prob < 1.0))
    throw std::invalid_argument("rwr_sample: restart probability must be in [0, 1)");
  const Index max_steps = opts.max_steps > 0 ? opts.max_steps : 64 * c;

  std::vector<NodeId> visited{initial};
  visited.reserve(static_cast<std::size_t>(c));
  if (g.degree(initial) > 0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    NodeId current = initial;
    for (Index step = 0; step < max_steps && static_cast<Index>(visited.size()) < c; ++step) {
      if (current != initial && coin(rng) < opts.restart_prob) {
        current = initial;
        continue;
      }
      const auto nbrs = g.neighbors(current);
      std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
      current = nbrs[pick(rng)];
      if (std::find(visited.begin(), visited.end(), current) == visited.end()) visited.push_back(current);
    }
  }
  const std::size_t found = visited.size();
  for (std::size_t i = 0; static_cast<Index>(visited.size()) < c; ++i) visited.push_back(visited[i % found]);
  return visited;
}

namespace {

InstancePair grow_pair(const AttributedGraph& g, NodeId target, NodeId initial, int label, const SamplerOptions& opts,
                       Rng& rng) {
  InstancePair pair;
  pair.target = target;
  pair.label = label;
  pair.sub_nodes = rwr_sample(g, initial, opts, rng);
  pair.adjacency = induced_adjacency(g, pair.sub_nodes);
  return pair;
}

}  // namespace

InstancePair sample_positive(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng) {
  return grow_pair(g, target, target, 1, opts, rng);
}

InstancePair sample_negative(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng) {
  const Index n = g.node_count();
  if (n < 2) throw std::invalid_argument("sample_negative: graph needs at least two nodes");
  if (target < 0 || target >= n) throw std::invalid_argument("sample_negative: target out of range");
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 2));
  NodeId initial = pick(rng);
  if (initial >= target) ++initial;
  return grow_pair(g, target, initial, 0, opts, rng);
}

void attach_features(const AttributedGraph& g, InstancePair& pair) {
  pair.features.resize(pair.size(), g.attribute_dim());
  for (Index a = 0; a < pair.size(); ++a) pair.features.row(a) = g.attribute_row(pair.sub_nodes[a]);
  pair.features.row(0).setZero();
  pair.target_features = g.attribute_row(pair.target);
}

InstancePair make_positive_pair(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng) {
  auto pair = sample_positive(g, target, opts, rng);
  attach_features(g, pair);
  return pair;
}

InstancePair make_negative_pair(const AttributedGraph& g, NodeId target, const SamplerOptions& opts, Rng& rng) {
  auto pair = sample_negative(g, target, opts, rng);
  attach_features(g, pair);
  return pair;
}

std::vector<std::vector<NodeId>> epoch_batches(Index node_count, Index batch_size, Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("epoch_batches: batch size must be >= 1");
  std::vector<NodeId> order(static_cast<std::size_t>(node_count));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<NodeId>> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

}  // namespace cola
