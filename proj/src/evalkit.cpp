#include "cola/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cola/error.hpp"

namespace cola {

namespace {

struct ClassCounts {
  double positives = 0;
  double negatives = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  ClassCounts counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(scores[i])) throw std::invalid_argument("auc: non-finite score at index " + std::to_string(i));
    if (labels[i] > 1) throw std::invalid_argument("auc: labels must be 0 or 1");
    (labels[i] ? counts.positives : counts.negatives) += 1;
  }
  if (counts.positives == 0 || counts.negatives == 0)
    throw std::invalid_argument("auc: labels contain a single class; AUC is undefined");
  return counts;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto counts = check_inputs(scores, labels);
  const auto order = order_by_score(scores, false);
  // Sum of 1-based midranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double tied_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) tied_pos += labels[order[j++]];
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += tied_pos * midrank;
    i = j;
  }
  const double u = rank_sum - counts.positives * (counts.positives + 1) / 2.0;
  return u / (counts.positives * counts.negatives);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto counts = check_inputs(scores, labels);
  const auto order = order_by_score(scores, true);
  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? tp : fp) += 1;
      ++j;
    }
    roc.points.emplace_back(fp / counts.negatives, tp / counts.positives);
    i = j;
  }
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto [x0, y0] = roc.points[k - 1];
    const auto [x1, y1] = roc.points[k];
    roc.auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return roc;
}

RunSummary aggregate_runs(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate_runs: no values");
  RunSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stdev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "R" || name == "rounds") return SweepAxis::rounds;
  if (name == "c" || name == "subgraph_size") return SweepAxis::subgraph_size;
  if (name == "d" || name == "embedding_dim") return SweepAxis::embedding_dim;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "' (expected R, c or d)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::rounds: return "R";
    case SweepAxis::subgraph_size: return "c";
    case SweepAxis::embedding_dim: return "d";
  }
  return "?";
}

SweepResult sweep(const AttributedGraph& g, const TrainConfig& base, SweepAxis axis, std::span<const Index> values,
                  Index runs) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  if (runs < 1) throw std::invalid_argument("sweep: runs must be >= 1");
  if (!g.labels()) throw std::invalid_argument("sweep: graph has no anomaly labels");
  const auto& labels = *g.labels();
  SweepResult result;
  result.axis = axis;
  std::vector<std::vector<double>> aucs(values.size());

  for (Index run = 0; run < runs; ++run) {
    TrainConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(run);
    if (axis == SweepAxis::rounds) {
      const auto trained = train(g, cfg);
      ++result.trainings;
      cfg.rounds = *std::max_element(values.begin(), values.end());
      const auto scored = infer_scores(g, trained.params, cfg);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const VectorXd k = estimate_all(scored.pos_rounds, scored.neg_rounds, cfg.estimation, cfg.source, values[i]);
        aucs[i].push_back(auc({k.data(), static_cast<std::size_t>(k.size())}, labels));
      }
      continue;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      TrainConfig point = cfg;
      (axis == SweepAxis::subgraph_size ? point.subgraph_size : point.embedding_dim) = values[i];
      const auto trained = train(g, point);
      ++result.trainings;
      const auto scored = infer_scores(g, trained.params, point);
      aucs[i].push_back(auc({scored.scores.data(), static_cast<std::size_t>(scored.scores.size())}, labels));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto s = aggregate_runs(aucs[i]);
    result.rows.push_back({static_cast<double>(values[i]), s.mean, s.stdev});
  }
  return result;
}

void save_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  out << "fpr,tpr\n";
  for (const auto& [fpr, tpr] : roc.points) out << fpr << ',' << tpr << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  out << to_string(result.axis) << ",mean_auc,std_auc\n";
  for (const auto& row : result.rows) out << row.value << ',' << row.mean_auc << ',' << row.std_auc << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace cola
