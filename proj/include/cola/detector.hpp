#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "cola/graph.hpp"
#include "cola/model.hpp"
#include "cola/sampling.hpp"

namespace cola {

/// How per-round differences d_r are turned into one anomaly score.
/// Composite modes add their terms; std is the population deviation of d.
enum class EstimationMode { mean, min, max, std, mean_plus_min, mean_plus_max, mean_plus_std, neg_std, mean_minus_std };

/// Which round scores enter d_r: both gives s- - s+, positive_only gives
/// -s+, negative_only gives s-. Larger always means more anomalous.
enum class ScoreSource { both, positive_only, negative_only };

/// Where first-layer projections X W^(0) come from during scoring: one
/// n x d table for the whole graph, or per-node gathers that keep memory
/// independent of n. `automatic` uses the table when d <= f, i.e. when it is
/// no larger than the attribute matrix itself.
enum class ProjectionPolicy { automatic, full, blockwise };

EstimationMode parse_estimation_mode(std::string_view name);
std::string_view to_string(EstimationMode m);
ScoreSource parse_score_source(std::string_view name);
std::string_view to_string(ScoreSource s);
std::span<const EstimationMode> all_estimation_modes();

struct TrainConfig {
  Index epochs = 100;           ///< T
  Index batch_size = 300;       ///< B
  double learning_rate = 1e-3;
  Index subgraph_size = 4;      ///< c
  Index embedding_dim = 64;     ///< d
  Index layers = 1;             ///< L
  Index rounds = 256;           ///< R
  double restart_prob = 0.5;
  Index max_steps = 0;          ///< RWR step cap, 0 = 64 * c
  std::uint64_t seed = 0;
  ReadoutMode readout = ReadoutMode::average;
  EstimationMode estimation = EstimationMode::mean;
  ScoreSource source = ScoreSource::both;
  Activation activation = Activation::relu;
  bool activate_output = true;
  Index workers = 1;
  ProjectionPolicy projection = ProjectionPolicy::automatic;

  SamplerOptions sampler() const { return {subgraph_size, restart_prob, max_steps}; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrainResult {
  ModelParams<double> params;
  std::vector<double> loss_log;  ///< summed BCE per iteration
};

using TrainProgress = std::function<void(Index iteration, Index epoch, double loss)>;

/// Training phase: T epochs of shuffled batches; each node of a batch
/// contributes one positive and one negative pair, and every batch is one
/// Adam step on the summed BCE. Throws NumericError naming the iteration
/// on a non-finite loss.
TrainResult train(const AttributedGraph& g, const TrainConfig& cfg, const TrainProgress& progress = {});

/// The 2B pairs of the first training iteration, drawn exactly as `train`
/// draws them. For inspection only.
std::vector<InstancePair> first_training_batch(const AttributedGraph& g, const TrainConfig& cfg);

struct BatchEvaluation {
  std::vector<double> scores;
  std::vector<double> logits;
  double loss = 0.0;
  Gradients<double> gradients;  ///< empty unless requested
};

/// Forward (and optionally backward) over skeleton pairs. The first layer is
/// evaluated once per distinct node in the batch, so features are never
/// copied per pair.
BatchEvaluation evaluate_batch(const AttributedGraph& g, const ModelParams<double>& params,
                               std::span<const InstancePair> pairs, ReadoutMode mode, bool with_gradient);

struct AnomalyScores {
  VectorXd scores;         ///< k_i
  RowMatrixXd pos_rounds;  ///< n x R, s+
  RowMatrixXd neg_rounds;  ///< n x R, s-
};

/// Receives the R positive and R negative round scores of one node. Calls
/// are serialized but arrive in no particular node order when workers > 1.
using RoundConsumer = std::function<void(NodeId node, std::span<const double> pos, std::span<const double> neg)>;

/// Inference phase without keeping the n x R matrices: R positive and R
/// negative pairs per node, node-major. Each node draws from its own RNG
/// stream, so results do not depend on the worker count.
void infer_rounds(const AttributedGraph& g, const ModelParams<double>& params, const TrainConfig& cfg,
                  const RoundConsumer& consume);

AnomalyScores infer_scores(const AttributedGraph& g, const ModelParams<double>& params, const TrainConfig& cfg);

/// Anomaly score of one node from its round scores.
double estimate(std::span<const double> pos, std::span<const double> neg, EstimationMode mode, ScoreSource source);

/// Scores from stored round matrices, optionally from only the first
/// `rounds` columns (0 = all).
VectorXd estimate_all(const RowMatrixXd& pos, const RowMatrixXd& neg, EstimationMode mode, ScoreSource source,
                      Index rounds = 0);

}  // namespace cola
