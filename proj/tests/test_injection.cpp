#include <algorithm>
#include <numeric>
#include <set>

#include "cola/injection.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cola;
using namespace cola::testing;

namespace {

bool induced_is_clique(const AttributedGraph& g, const std::vector<NodeId>& members) {
  const auto adj = induced_adjacency(g, members);
  const auto p = static_cast<Index>(members.size());
  return adj == MatrixXd::Ones(p, p) - MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("structural injection plants disjoint cliques") {
  const auto g = random_graph(120, 3.0, 4, 5);
  Rng rng = make_stream(1, 0);
  const auto res = inject_structural(g, 5, 4, rng);
  CHECK(res.cliques.size() == 4);
  std::set<NodeId> members;
  for (const auto& clique : res.cliques) {
    CHECK(clique.size() == 5);
    CHECK(induced_is_clique(res.graph, clique));
    members.insert(clique.begin(), clique.end());
  }
  CHECK(members.size() == 20);
  CHECK(std::accumulate(res.labels.begin(), res.labels.end(), 0) == 20);
  // Edges are only ever added.
  for (const auto& [a, b] : g.edge_list()) CHECK(res.graph.has_edge(a, b));
  CHECK(res.graph.attributes() == g.attributes());
}

TEST_CASE("structural injection with q = 0 is a no-op") {
  const auto g = random_graph(30, 2.0, 3, 2);
  Rng rng = make_stream(0, 0);
  const auto res = inject_structural(g, 15, 0, rng);
  CHECK(res.graph.offsets() == g.offsets());
  CHECK(res.graph.columns() == g.columns());
  CHECK(std::all_of(res.labels.begin(), res.labels.end(), [](auto l) { return l == 0; }));
}

TEST_CASE("structural injection needs enough unmarked nodes") {
  const auto g = random_graph(10, 2.0, 3, 2);
  Rng rng = make_stream(0, 0);
  CHECK_THROWS_AS(inject_structural(g, 5, 3, rng), std::invalid_argument);
}

TEST_CASE("contextual donor is the farthest candidate") {
  // Three distinct rows; with k = 2 both other nodes are candidates, so the
  // donor must be the farther of the two.
  RowMatrixXd x(3, 2);
  x << 0, 0, 1, 0, 5, 5;
  const auto g = AttributedGraph::from_edges(3, std::vector<AttributedGraph::Edge>{{0, 1}}, x);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, 0);
    const auto res = inject_contextual(g, 1, 2, rng);
    REQUIRE(res.swaps.size() == 1);
    const auto& [target, donor, candidates] = res.swaps.front();
    CHECK(candidates.size() == 2);
    NodeId best = -1;
    double best_dist = -1;
    for (NodeId v = 0; v < 3; ++v) {
      if (v == target) continue;
      const double dist = (x.row(v) - x.row(target)).norm();
      if (dist > best_dist) {
        best_dist = dist;
        best = v;
      }
    }
    CHECK(donor == best);
    CHECK(res.graph.attribute_row(target) == x.row(donor));
    CHECK(res.graph.attribute_row(donor) == x.row(donor));
    CHECK(res.graph.columns() == g.columns());
  }
}

TEST_CASE("contextual candidates are k distinct other nodes") {
  const auto g = random_graph(60, 3.0, 4, 9);
  Rng rng = make_stream(4, 0);
  const auto res = inject_contextual(g, 10, 7, rng);
  for (const auto& s : res.swaps) {
    std::set<NodeId> distinct(s.candidates.begin(), s.candidates.end());
    CHECK(distinct.size() == 7);
    CHECK(distinct.count(s.target) == 0);
    CHECK(distinct.count(s.donor) == 1);
  }
}

TEST_CASE("contextual injection with count = 0 leaves attributes unchanged") {
  const auto g = random_graph(20, 2.0, 3, 9);
  Rng rng = make_stream(0, 0);
  CHECK(inject_contextual(g, 0, 50, rng).graph.attributes() == g.attributes());
}

TEST_CASE("combined injection") {
  const auto g = random_graph(200, 4.0, 6, 3);
  InjectionConfig cfg{5, 4, 10, 42};
  const auto a = inject_combined(g, cfg);
  CHECK(std::accumulate(a.labels.begin(), a.labels.end(), 0) == 40);
  CHECK(a.graph.labels() == a.labels);
  std::set<NodeId> structural;
  for (const auto& c : a.cliques) structural.insert(c.begin(), c.end());
  for (const auto& s : a.swaps) CHECK(structural.count(s.target) == 0);

  const auto b = inject_combined(g, cfg);
  CHECK(a.graph == b.graph);

  cfg.clique_count = 21;  // 2pq = 210 > 200
  CHECK_THROWS_AS(inject_combined(g, cfg), std::invalid_argument);
  CHECK_THROWS_AS((InjectionConfig{1, 1, 1, 0}.validate(100)), std::invalid_argument);
  CHECK_THROWS_AS((InjectionConfig{2, 1, 0, 0}.validate(100)), std::invalid_argument);
}

TEST_CASE("benchmark-scale anomaly counts follow 2pq") {
  // Cora uses p = 15, q = 5 and Pubmed p = 15, q = 20.
  const auto g = random_graph(700, 3.0, 4, 8);
  InjectionConfig cora{15, 5, 50, 0};
  const auto res = inject_combined(g, cora);
  CHECK(std::accumulate(res.labels.begin(), res.labels.end(), 0) == 150);
  InjectionConfig pubmed{15, 20, 50, 0};
  CHECK(2 * pubmed.clique_size * pubmed.clique_count == 600);
}
