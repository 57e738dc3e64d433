#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cola/detector.hpp"

namespace cola {

/// Probability that a random anomaly outscores a random normal node, ties
/// counted as one half. Sort-and-midrank, O(n log n). Throws
/// std::invalid_argument unless both classes are present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  ///< (fpr, tpr), (0,0) to (1,1)
  double auc = 0.0;                               ///< trapezoidal area under points
};

/// One point per distinct score threshold, taken in descending order.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RunSummary {
  double mean = 0.0;
  double stdev = 0.0;  ///< population standard deviation
};

RunSummary aggregate_runs(std::span<const double> values);

enum class SweepAxis { rounds, subgraph_size, embedding_dim };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::rounds;
  std::vector<SweepRow> rows;
  Index trainings = 0;  ///< models trained while sweeping
};

/// Parameter study over one axis, `runs` seeds per value (seed, seed+1, ...).
/// The R axis trains once per run and re-estimates from prefixes of the
/// largest round matrix; the c and d axes retrain for every value. The
/// graph must carry labels.
SweepResult sweep(const AttributedGraph& g, const TrainConfig& base, SweepAxis axis, std::span<const Index> values,
                  Index runs = 1);

void save_roc_csv(const RocCurve& roc, const std::filesystem::path& path);
void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace cola
