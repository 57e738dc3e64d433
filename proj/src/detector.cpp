#include "cola/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace cola {

namespace {

constexpr std::array<std::pair<EstimationMode, std::string_view>, 9> kModeNames{{
    {EstimationMode::mean, "mean"},
    {EstimationMode::min, "min"},
    {EstimationMode::max, "max"},
    {EstimationMode::std, "std"},
    {EstimationMode::mean_plus_min, "mean+min"},
    {EstimationMode::mean_plus_max, "mean+max"},
    {EstimationMode::mean_plus_std, "mean+std"},
    {EstimationMode::neg_std, "-std"},
    {EstimationMode::mean_minus_std, "mean-std"},
}};

constexpr std::array<EstimationMode, 9> kAllModes{
    EstimationMode::mean,          EstimationMode::min,     EstimationMode::max,
    EstimationMode::std,           EstimationMode::mean_plus_min, EstimationMode::mean_plus_max,
    EstimationMode::mean_plus_std, EstimationMode::neg_std, EstimationMode::mean_minus_std};

// Stream ids; training and inference never share one.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kInferStreamBase = std::uint64_t{1} << 40;

/// Sorted distinct node ids with binary-search lookup. Memory is bounded by
/// the batch, not by the graph.
class NodeTable {
public:
  explicit NodeTable(std::span<const InstancePair> pairs) {
    for (const auto& p : pairs) {
      ids_.push_back(p.target);
      ids_.insert(ids_.end(), p.sub_nodes.begin() + 1, p.sub_nodes.end());
    }
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  Index index_of(NodeId v) const {
    return static_cast<Index>(std::lower_bound(ids_.begin(), ids_.end(), v) - ids_.begin());
  }
  const std::vector<NodeId>& ids() const { return ids_; }

  RowMatrixXd gather(const RowMatrixXd& x) const {
    RowMatrixXd out(static_cast<Index>(ids_.size()), x.cols());
    for (std::size_t i = 0; i < ids_.size(); ++i) out.row(static_cast<Index>(i)) = x.row(ids_[i]);
    return out;
  }

private:
  std::vector<NodeId> ids_;
};

/// Runs one pair through the model given a lookup for projected rows.
template <typename RowOf>
ForwardTrace<double> forward_pair(const ModelParams<double>& params, const InstancePair& pair, ReadoutMode mode,
                                  RowOf&& projected_row) {
  const Index c = pair.size();
  const Index width = params.layers.front().cols();
  MatrixXd projected(c, width);
  projected.row(0).setZero();
  for (Index a = 1; a < c; ++a) projected.row(a) = projected_row(pair.sub_nodes[a]);
  return forward_projected<double>(params, normalize_adjacency(pair.adjacency), projected,
                                   RowVectorXd(projected_row(pair.target)), mode);
}

void sample_batch(const AttributedGraph& g, std::span<const NodeId> batch, const SamplerOptions& opts, Rng& rng,
                  std::vector<InstancePair>& pairs) {
  pairs.clear();
  for (NodeId v : batch) pairs.push_back(sample_positive(g, v, opts, rng));
  for (NodeId v : batch) pairs.push_back(sample_negative(g, v, opts, rng));
}

void require_finite_score(double s, NodeId node) {
  if (!std::isfinite(s)) throw NumericError("non-finite round score for node " + std::to_string(node));
}

}  // namespace

EstimationMode parse_estimation_mode(std::string_view name) {
  for (const auto& [mode, text] : kModeNames)
    if (text == name) return mode;
  if (name == "neg_std") return EstimationMode::neg_std;
  throw std::invalid_argument("unknown estimation mode '" + std::string(name) + "'");
}

std::string_view to_string(EstimationMode m) {
  for (const auto& [mode, text] : kModeNames)
    if (mode == m) return text;
  return "?";
}

std::span<const EstimationMode> all_estimation_modes() { return kAllModes; }

ScoreSource parse_score_source(std::string_view name) {
  if (name == "both" || name == "+/-") return ScoreSource::both;
  if (name == "positive_only" || name == "+") return ScoreSource::positive_only;
  if (name == "negative_only" || name == "-") return ScoreSource::negative_only;
  throw std::invalid_argument("unknown score source '" + std::string(name) + "'");
}

std::string_view to_string(ScoreSource s) {
  switch (s) {
    case ScoreSource::both: return "both";
    case ScoreSource::positive_only: return "positive_only";
    case ScoreSource::negative_only: return "negative_only";
  }
  return "?";
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw std::invalid_argument(std::string(field) + " " + rule);
  };
  require(epochs >= 0, "T", "must be >= 0");
  require(batch_size >= 1, "B", "must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "lr", "must be > 0");
  require(subgraph_size >= 1, "c", "must be >= 1");
  require(embedding_dim >= 1, "d", "must be >= 1");
  require(layers >= 1, "layers", "must be >= 1");
  require(rounds >= 1, "R", "must be >= 1");
  require(restart_prob > 0.0 && restart_prob < 1.0, "restart_prob", "must be in (0, 1)");
  require(max_steps >= 0, "max_steps", "must be >= 0");
  require(workers >= 1, "workers", "must be >= 1");
}

BatchEvaluation evaluate_batch(const AttributedGraph& g, const ModelParams<double>& params,
                               std::span<const InstancePair> pairs, ReadoutMode mode, bool with_gradient) {
  if (params.input_dim() != g.attribute_dim())
    throw std::invalid_argument("evaluate_batch: model expects " + std::to_string(params.input_dim()) +
                                " attributes, graph has " + std::to_string(g.attribute_dim()));
  const NodeTable table(pairs);
  const RowMatrixXd x_batch = table.gather(g.attributes());
  const RowMatrixXd projected = x_batch * params.layers.front();
  const auto row_of = [&](NodeId v) { return projected.row(table.index_of(v)); };

  BatchEvaluation out;
  out.scores.reserve(pairs.size());
  out.logits.reserve(pairs.size());
  std::vector<int> labels;
  labels.reserve(pairs.size());
  RowMatrixXd d_projected;
  if (with_gradient) {
    out.gradients = Gradients<double>::zeros_like(params);
    d_projected = RowMatrixXd::Zero(projected.rows(), projected.cols());
  }
  MatrixXd d_pair;
  RowVectorXd d_target;
  for (const auto& pair : pairs) {
    const auto trace = forward_pair(params, pair, mode, row_of);
    out.scores.push_back(trace.score);
    out.logits.push_back(trace.logit);
    labels.push_back(pair.label);
    if (!with_gradient) continue;
    backward_projected(params, trace, bce_logit_slope(trace, pair.label), out.gradients, d_pair, d_target);
    // Row 0 was zeroed before projection, so its gradient goes nowhere.
    for (Index a = 1; a < pair.size(); ++a) d_projected.row(table.index_of(pair.sub_nodes[a])) += d_pair.row(a);
    d_projected.row(table.index_of(pair.target)) += d_target;
  }
  out.loss = bce_from_logits<double>(out.logits, labels);
  if (with_gradient) out.gradients.layers.front().noalias() += x_batch.transpose() * d_projected;
  return out;
}

TrainResult train(const AttributedGraph& g, const TrainConfig& cfg, const TrainProgress& progress) {
  cfg.validate();
  if (g.node_count() < 2) throw std::invalid_argument("train: graph needs at least two nodes");
  TrainResult result;
  result.params = init_params<double>(g.attribute_dim(), cfg.embedding_dim, cfg.layers, cfg.seed, cfg.activation);
  result.params.activate_output = cfg.activate_output;
  auto adam = AdamState<double>::for_params(result.params);
  Rng rng = make_stream(cfg.seed, kTrainStream);
  const auto opts = cfg.sampler();

  Index iteration = 0;
  std::vector<InstancePair> pairs;
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch : epoch_batches(g.node_count(), cfg.batch_size, rng)) {
      sample_batch(g, batch, opts, rng, pairs);
      auto eval = evaluate_batch(g, result.params, pairs, cfg.readout, true);
      if (!std::isfinite(eval.loss))
        throw NumericError("non-finite training loss at iteration " + std::to_string(iteration));
      adam_step(result.params, eval.gradients, adam, cfg.learning_rate);
      result.loss_log.push_back(eval.loss);
      if (progress) progress(iteration, epoch, eval.loss);
      ++iteration;
    }
  }
  return result;
}

std::vector<InstancePair> first_training_batch(const AttributedGraph& g, const TrainConfig& cfg) {
  cfg.validate();
  if (g.node_count() < 2) throw std::invalid_argument("first_training_batch: graph needs at least two nodes");
  Rng rng = make_stream(cfg.seed, kTrainStream);
  const auto batches = epoch_batches(g.node_count(), cfg.batch_size, rng);
  std::vector<InstancePair> pairs;
  sample_batch(g, batches.front(), cfg.sampler(), rng, pairs);
  return pairs;
}

void infer_rounds(const AttributedGraph& g, const ModelParams<double>& params, const TrainConfig& cfg,
                  const RoundConsumer& consume) {
  cfg.validate();
  const Index n = g.node_count();
  if (n < 2) throw std::invalid_argument("infer_rounds: graph needs at least two nodes");
  if (params.input_dim() != g.attribute_dim())
    throw std::invalid_argument("infer_rounds: model expects " + std::to_string(params.input_dim()) +
                                " attributes, graph has " + std::to_string(g.attribute_dim()));
  const auto opts = cfg.sampler();
  const Index R = cfg.rounds;
  const Index width = params.layers.front().cols();
  const bool full_table = cfg.projection == ProjectionPolicy::full ||
                          (cfg.projection == ProjectionPolicy::automatic && width <= g.attribute_dim());
  RowMatrixXd table;
  if (full_table) table = g.attributes() * params.layers.front();

  std::mutex sink_mutex;
  auto work = [&](NodeId begin, NodeId end) {
    std::vector<InstancePair> pairs(static_cast<std::size_t>(2 * R));
    std::vector<double> pos(static_cast<std::size_t>(R)), neg(static_cast<std::size_t>(R));
    for (NodeId v = begin; v < end; ++v) {
      Rng rng = make_stream(cfg.seed, kInferStreamBase + static_cast<std::uint64_t>(v));
      for (Index r = 0; r < R; ++r) pairs[static_cast<std::size_t>(r)] = sample_positive(g, v, opts, rng);
      for (Index r = 0; r < R; ++r) pairs[static_cast<std::size_t>(R + r)] = sample_negative(g, v, opts, rng);
      if (full_table) {
        const auto row_of = [&](NodeId u) { return table.row(u); };
        for (Index r = 0; r < R; ++r) {
          pos[static_cast<std::size_t>(r)] = forward_pair(params, pairs[static_cast<std::size_t>(r)], cfg.readout, row_of).score;
          neg[static_cast<std::size_t>(r)] = forward_pair(params, pairs[static_cast<std::size_t>(R + r)], cfg.readout, row_of).score;
        }
      } else {
        const auto eval = evaluate_batch(g, params, pairs, cfg.readout, false);
        std::copy_n(eval.scores.begin(), R, pos.begin());
        std::copy_n(eval.scores.begin() + R, R, neg.begin());
      }
      for (Index r = 0; r < R; ++r) {
        require_finite_score(pos[static_cast<std::size_t>(r)], v);
        require_finite_score(neg[static_cast<std::size_t>(r)], v);
      }
      std::lock_guard lock(sink_mutex);
      consume(v, pos, neg);
    }
  };

  const Index workers = std::min<Index>(cfg.workers, n);
  if (workers <= 1) {
    work(0, static_cast<NodeId>(n));
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> threads;
    for (Index w = 0; w < workers; ++w) {
      const auto begin = static_cast<NodeId>(n * w / workers);
      const auto end = static_cast<NodeId>(n * (w + 1) / workers);
      threads.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

AnomalyScores infer_scores(const AttributedGraph& g, const ModelParams<double>& params, const TrainConfig& cfg) {
  AnomalyScores out;
  const Index n = g.node_count();
  out.pos_rounds.resize(n, cfg.rounds);
  out.neg_rounds.resize(n, cfg.rounds);
  out.scores.resize(n);
  infer_rounds(g, params, cfg, [&](NodeId v, std::span<const double> pos, std::span<const double> neg) {
    out.pos_rounds.row(v) = Eigen::Map<const RowVectorXd>(pos.data(), static_cast<Index>(pos.size()));
    out.neg_rounds.row(v) = Eigen::Map<const RowVectorXd>(neg.data(), static_cast<Index>(neg.size()));
    out.scores(v) = estimate(pos, neg, cfg.estimation, cfg.source);
  });
  return out;
}

double estimate(std::span<const double> pos, std::span<const double> neg, EstimationMode mode, ScoreSource source) {
  if (pos.empty() || pos.size() != neg.size()) throw std::invalid_argument("estimate: need R >= 1 rounds of each kind");
  const auto R = static_cast<Index>(pos.size());
  const Eigen::Map<const VectorXd> p(pos.data(), R), q(neg.data(), R);
  VectorXd d;
  switch (source) {
    case ScoreSource::both: d = q - p; break;
    case ScoreSource::positive_only: d = -p; break;
    case ScoreSource::negative_only: d = q; break;
  }
  const double mean = d.mean();
  const double stdev = std::sqrt((d.array() - mean).square().mean());
  switch (mode) {
    case EstimationMode::mean: return mean;
    case EstimationMode::min: return d.minCoeff();
    case EstimationMode::max: return d.maxCoeff();
    case EstimationMode::std: return stdev;
    case EstimationMode::mean_plus_min: return mean + d.minCoeff();
    case EstimationMode::mean_plus_max: return mean + d.maxCoeff();
    case EstimationMode::mean_plus_std: return mean + stdev;
    case EstimationMode::neg_std: return -stdev;
    case EstimationMode::mean_minus_std: return mean - stdev;
  }
  throw std::invalid_argument("estimate: unknown mode");
}

VectorXd estimate_all(const RowMatrixXd& pos, const RowMatrixXd& neg, EstimationMode mode, ScoreSource source,
                      Index rounds) {
  if (pos.rows() != neg.rows() || pos.cols() != neg.cols())
    throw std::invalid_argument("estimate_all: round matrices differ in shape");
  const Index R = rounds > 0 ? rounds : pos.cols();
  if (R > pos.cols()) throw std::invalid_argument("estimate_all: asked for more rounds than stored");
  VectorXd out(pos.rows());
  for (Index i = 0; i < pos.rows(); ++i)
    out(i) = estimate({pos.row(i).data(), static_cast<std::size_t>(R)}, {neg.row(i).data(), static_cast<std::size_t>(R)},
                      mode, source);
  return out;
}

}  // namespace cola
