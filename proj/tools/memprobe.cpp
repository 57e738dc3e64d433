// Peak-memory probe for the training and scoring phases on a large sparse
// synthetic graph. Prints one JSON object on stdout.
//
//   cola_memprobe [nodes] [mean_degree] [features] [rounds] [epochs]

#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include "cola/detector.hpp"

namespace {

std::size_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;
}

long arg_or(int argc, char** argv, int i, long fallback) { return argc > i ? std::stol(argv[i]) : fallback; }

}  // namespace

int main(int argc, char** argv) {
  using namespace cola;
  const Index n = arg_or(argc, argv, 1, 200000);
  const double degree = static_cast<double>(arg_or(argc, argv, 2, 5));
  const Index f = arg_or(argc, argv, 3, 32);
  const Index rounds = arg_or(argc, argv, 4, 4);
  const Index epochs = arg_or(argc, argv, 5, 1);

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(42);
  AttributedGraph g;
  {
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    std::vector<AttributedGraph::Edge> edges(static_cast<std::size_t>(degree * static_cast<double>(n) / 2));
    for (auto& e : edges) e = {node(rng), node(rng)};
    std::normal_distribution<double> z;
    RowMatrixXd x(n, f);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
    g = AttributedGraph::from_edges(n, edges, std::move(x));
  }
  const std::size_t after_load = peak_rss_bytes();

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.rounds = rounds;
  cfg.seed = 1;
  const auto trained = train(g, cfg);
  const std::size_t after_train = peak_rss_bytes();

  double checksum = 0.0;
  infer_rounds(g, trained.params, cfg, [&](NodeId, std::span<const double> pos, std::span<const double> neg) {
    checksum += estimate(pos, neg, cfg.estimation, cfg.source);
  });
  const std::size_t after_score = peak_rss_bytes();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::size_t storage = g.storage_bytes();
  std::printf(
      "{\"nodes\": %lld, \"undirected_edges\": %lld, \"features\": %lld, \"embedding_dim\": %lld, "
      "\"batch_size\": %lld, \"rounds\": %lld, \"storage_bytes\": %zu, \"peak_rss_after_load\": %zu, "
      "\"peak_rss_after_train\": %zu, \"peak_rss_bytes\": %zu, \"ratio\": %.4f, \"checksum\": %.6f, "
      "\"seconds\": %.1f}\n",
      static_cast<long long>(n), static_cast<long long>(g.edge_count()), static_cast<long long>(f),
      static_cast<long long>(cfg.embedding_dim), static_cast<long long>(cfg.batch_size),
      static_cast<long long>(rounds), storage, after_load, after_train, after_score,
      static_cast<double>(after_score) / static_cast<double>(storage), checksum, seconds);
  return 0;
}
