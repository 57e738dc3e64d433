#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cola/error.hpp"
#include "cola/graph.hpp"
#include "cola/sampling.hpp"
#include "cola/types.hpp"

namespace cola {

enum class Activation { relu, identity, tanh };
enum class ReadoutMode { average, max, min, weighted_average };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);
ReadoutMode parse_readout(std::string_view name);
std::string_view to_string(ReadoutMode m);

/// Learnable weights of the contrastive model. layers[l] maps width d_l to
/// d_{l+1} with d_0 = f and every later width = d. The same layer matrices
/// drive both the subgraph GCN path and the target-node dense path.
template <typename Scalar>
struct ModelParams {
  std::vector<Matrix<Scalar>> layers;
  Matrix<Scalar> discriminator;
  Activation activation = Activation::relu;
  /// Apply the activation after the last layer too.
  bool activate_output = true;

  Index input_dim() const { return layers.front().rows(); }
  Index embedding_dim() const { return layers.back().cols(); }
  Index layer_count() const { return static_cast<Index>(layers.size()); }

  bool all_finite() const {
    for (const auto& w : layers)
      if (!w.allFinite()) return false;
    return discriminator.allFinite();
  }
};

/// Glorot-uniform weights, deterministic in `seed`.
template <typename Scalar>
ModelParams<Scalar> init_params(Index f, Index d, Index layers, std::uint64_t seed,
                                Activation activation = Activation::relu) {
  if (f < 1 || d < 1 || layers < 1) throw std::invalid_argument("init_params: f, d and L must be >= 1");
  Rng rng = make_stream(seed, 0x1417);
  auto glorot = [&rng](Index rows, Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix<Scalar> w(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) w(i, j) = static_cast<Scalar>(u(rng));
    return w;
  };
  ModelParams<Scalar> p;
  p.activation = activation;
  for (Index l = 0; l < layers; ++l) p.layers.push_back(glorot(l == 0 ? f : d, d));
  p.discriminator = glorot(d, d);
  return p;
}

namespace detail {

template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& x, Activation a) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  switch (a) {
    case Activation::relu: return Plain(x.array().max(Scalar(0)).matrix());
    case Activation::tanh: return Plain(x.array().tanh().matrix());
    case Activation::identity: break;
  }
  return Plain(x);
}

/// Elementwise derivative of the activation, from pre- and post-activation.
template <typename Derived>
auto activation_slope(const Eigen::MatrixBase<Derived>& pre, const Eigen::MatrixBase<Derived>& post, Activation a) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  switch (a) {
    case Activation::relu: return Plain((pre.array() > Scalar(0)).template cast<Scalar>().matrix());
    case Activation::tanh: return Plain((Scalar(1) - post.array().square()).matrix());
    case Activation::identity: break;
  }
  return Plain(Plain::Ones(pre.rows(), pre.cols()));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x, const char* stage) {
  if (!x.allFinite()) throw NumericError(std::string("non-finite value in ") + stage);
}

}  // namespace detail

template <typename Scalar>
Activation layer_activation(const ModelParams<Scalar>& p, Index layer) {
  return layer + 1 == p.layer_count() && !p.activate_output ? Activation::identity : p.activation;
}

/// Per-pair intermediates kept for the backward pass.
template <typename Scalar>
struct ForwardTrace {
  Matrix<Scalar> norm_adj;
  std::vector<Matrix<Scalar>> sub_pre, sub_post;          ///< H pre/post activation, layers 1..L
  std::vector<RowVector<Scalar>> target_pre, target_post; ///< z pre/post activation, layers 1..L
  RowVector<Scalar> subgraph_embedding;                   ///< e^lg
  RowVector<Scalar> target_embedding;                     ///< e^tn
  ReadoutMode readout = ReadoutMode::average;
  Vector<Scalar> readout_weights;                         ///< softmax weights (weighted_average)
  std::vector<Index> readout_rows;                        ///< winning row per column (max/min)
  Scalar logit = 0;
  Scalar score = 0;

  const Matrix<Scalar>& node_embeddings() const { return sub_post.back(); }
};

/// Pooling of subgraph node embeddings into a single row vector. The
/// weighted mode uses softmax(E q^T) as weights, with q the target embedding.
template <typename Scalar>
RowVector<Scalar> readout(const Matrix<Scalar>& embeddings, ReadoutMode mode, const RowVector<Scalar>& query = {},
                          Vector<Scalar>* weights_out = nullptr, std::vector<Index>* rows_out = nullptr) {
  const Index c = embeddings.rows();
  if (c < 1 || embeddings.cols() < 1) throw std::invalid_argument("readout: empty embedding matrix");
  switch (mode) {
    case ReadoutMode::average:
      return embeddings.colwise().mean();
    case ReadoutMode::max:
    case ReadoutMode::min: {
      RowVector<Scalar> out(embeddings.cols());
      std::vector<Index> rows(static_cast<std::size_t>(embeddings.cols()));
      for (Index j = 0; j < embeddings.cols(); ++j) {
        Index best = 0;
        if (mode == ReadoutMode::max)
          embeddings.col(j).maxCoeff(&best);
        else
          embeddings.col(j).minCoeff(&best);
        rows[static_cast<std::size_t>(j)] = best;
        out(j) = embeddings(best, j);
      }
      if (rows_out) *rows_out = std::move(rows);
      return out;
    }
    case ReadoutMode::weighted_average: {
      if (query.size() != embeddings.cols())
        throw std::invalid_argument("readout: weighted_average needs a query of matching width");
      Vector<Scalar> logits = embeddings * query.transpose();
      Vector<Scalar> w = (logits.array() - logits.maxCoeff()).exp();
      w /= w.sum();
      RowVector<Scalar> out = w.transpose() * embeddings;
      if (weights_out) *weights_out = std::move(w);
      return out;
    }
  }
  throw std::invalid_argument("readout: unknown mode");
}

/// Forward pass from already projected first-layer inputs: `projected` is
/// X_i W^(0) (c x d_1, row 0 zero after anonymization) and
/// `target_projected` is x_target W^(0).
template <typename Scalar>
ForwardTrace<Scalar> forward_projected(const ModelParams<Scalar>& p, Matrix<Scalar> norm_adj,
                                       const Matrix<Scalar>& projected, const RowVector<Scalar>& target_projected,
                                       ReadoutMode mode) {
  const Index c = norm_adj.rows();
  if (projected.rows() != c || projected.cols() != p.layers.front().cols() ||
      target_projected.size() != p.layers.front().cols())
    throw std::invalid_argument("forward: projected input shape mismatch");

  ForwardTrace<Scalar> t;
  t.readout = mode;
  t.norm_adj = std::move(norm_adj);
  const Index L = p.layer_count();
  for (Index l = 0; l < L; ++l) {
    const Activation act = layer_activation(p, l);
    Matrix<Scalar> pre = l == 0 ? Matrix<Scalar>(t.norm_adj * projected)
                                : Matrix<Scalar>(t.norm_adj * (t.sub_post.back() * p.layers[l]));
    RowVector<Scalar> zpre = l == 0 ? target_projected : RowVector<Scalar>(t.target_post.back() * p.layers[l]);
    detail::require_finite(pre, "GCN layer");
    detail::require_finite(zpre, "target-node layer");
    t.sub_post.push_back(detail::activate(pre, act));
    t.sub_pre.push_back(std::move(pre));
    t.target_post.push_back(detail::activate(zpre, act));
    t.target_pre.push_back(std::move(zpre));
  }
  t.target_embedding = t.target_post.back();
  t.subgraph_embedding = readout<Scalar>(t.node_embeddings(), mode, t.target_embedding, &t.readout_weights,
                                         &t.readout_rows);
  detail::require_finite(t.subgraph_embedding, "readout");
  t.logit = t.subgraph_embedding.dot(p.discriminator * t.target_embedding.transpose());
  if (!std::isfinite(static_cast<double>(t.logit))) throw NumericError("non-finite value in discriminator");
  t.score = detail::sigmoid(t.logit);
  return t;
}

/// s = sigmoid(e^lg W^(d) e^tn^T) for a pair with attached features.
template <typename Scalar>
ForwardTrace<Scalar> forward(const ModelParams<Scalar>& p, const InstancePair& pair,
                             ReadoutMode mode = ReadoutMode::average) {
  if (!pair.has_features()) throw std::invalid_argument("forward: pair has no features attached");
  if (pair.features.cols() != p.input_dim() || pair.target_features.size() != p.input_dim())
    throw std::invalid_argument("forward: feature width " + std::to_string(pair.features.cols()) +
                                " does not match model input " + std::to_string(p.input_dim()));
  if (pair.adjacency.rows() != pair.features.rows())
    throw std::invalid_argument("forward: adjacency and feature row counts differ");
  const auto& w0 = p.layers.front();
  return forward_projected<Scalar>(p, normalize_adjacency(pair.adjacency.cast<Scalar>()),
                                   pair.features.cast<Scalar>() * w0,
                                   pair.target_features.cast<Scalar>() * w0, mode);
}

/// Same shapes as ModelParams; accumulates dLoss/dW.
template <typename Scalar>
struct Gradients {
  std::vector<Matrix<Scalar>> layers;
  Matrix<Scalar> discriminator;

  static Gradients zeros_like(const ModelParams<Scalar>& p) {
    Gradients g;
    for (const auto& w : p.layers) g.layers.push_back(Matrix<Scalar>::Zero(w.rows(), w.cols()));
    g.discriminator = Matrix<Scalar>::Zero(p.discriminator.rows(), p.discriminator.cols());
    return g;
  }

  Gradients& operator+=(const Gradients& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l] += other.layers[l];
    discriminator += other.discriminator;
    return *this;
  }

  bool all_finite() const {
    for (const auto& w : layers)
      if (!w.allFinite()) return false;
    return discriminator.allFinite();
  }
};

/// Backpropagates dLoss/dlogit through one trace. Accumulates into `grads`
/// for every weight except layer 0, whose input is not in the trace; the
/// gradients w.r.t. the projected inputs come back through `d_projected`
/// and `d_target_projected` instead.
template <typename Scalar>
void backward_projected(const ModelParams<Scalar>& p, const ForwardTrace<Scalar>& t, Scalar d_logit,
                        Gradients<Scalar>& grads, Matrix<Scalar>& d_projected, RowVector<Scalar>& d_target_projected) {
  const auto& e_lg = t.subgraph_embedding;
  const auto& e_tn = t.target_embedding;
  grads.discriminator.noalias() += d_logit * e_lg.transpose() * e_tn;
  RowVector<Scalar> d_lg = d_logit * (e_tn * p.discriminator.transpose());
  RowVector<Scalar> d_tn = d_logit * (e_lg * p.discriminator);

  const Matrix<Scalar>& emb = t.node_embeddings();
  const Index c = emb.rows();
  Matrix<Scalar> d_h;
  switch (t.readout) {
    case ReadoutMode::average:
      d_h = Vector<Scalar>::Constant(c, Scalar(1) / static_cast<Scalar>(c)) * d_lg;
      break;
    case ReadoutMode::max:
    case ReadoutMode::min:
      d_h = Matrix<Scalar>::Zero(c, emb.cols());
      for (Index j = 0; j < emb.cols(); ++j) d_h(t.readout_rows[static_cast<std::size_t>(j)], j) = d_lg(j);
      break;
    case ReadoutMode::weighted_average: {
      const auto& w = t.readout_weights;
      d_h = w * d_lg;
      const Vector<Scalar> dw = emb * d_lg.transpose();
      const Vector<Scalar> da = w.array() * (dw.array() - w.dot(dw));
      d_h.noalias() += da * e_tn;
      d_tn.noalias() += da.transpose() * emb;
      break;
    }
  }

  // A_hat is symmetric, so A_hat^T = A_hat.
  for (Index l = p.layer_count() - 1; l >= 0; --l) {
    const Activation act = layer_activation(p, l);
    Matrix<Scalar> d_pre = d_h.cwiseProduct(detail::activation_slope(t.sub_pre[l], t.sub_post[l], act));
    RowVector<Scalar> dz_pre = d_tn.cwiseProduct(detail::activation_slope(t.target_pre[l], t.target_post[l], act));
    if (l > 0) {
      const Matrix<Scalar> agg = t.norm_adj * t.sub_post[l - 1];
      grads.layers[l].noalias() += agg.transpose() * d_pre;
      grads.layers[l].noalias() += t.target_post[l - 1].transpose() * dz_pre;
      d_h = t.norm_adj * (d_pre * p.layers[l].transpose());
      d_tn = dz_pre * p.layers[l].transpose();
    } else {
      d_projected = t.norm_adj * d_pre;
      d_target_projected = std::move(dz_pre);
    }
  }
}

/// dLoss/dlogit of the logit-form BCE: s - y.
template <typename Scalar>
Scalar bce_logit_slope(const ForwardTrace<Scalar>& t, int label) {
  return t.score - static_cast<Scalar>(label);
}

/// Exact gradient of the summed BCE over a batch of pairs with features.
/// Traces must come from `forward` on the same params.
template <typename Scalar>
Gradients<Scalar> backward(const ModelParams<Scalar>& p, const std::vector<InstancePair>& pairs,
                           const std::vector<ForwardTrace<Scalar>>& traces) {
  if (pairs.size() != traces.size()) throw std::invalid_argument("backward: pairs and traces differ in length");
  auto grads = Gradients<Scalar>::zeros_like(p);
  Matrix<Scalar> d_proj;
  RowVector<Scalar> d_tproj;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    backward_projected(p, traces[i], bce_logit_slope(traces[i], pairs[i].label), grads, d_proj, d_tproj);
    grads.layers[0].noalias() += pairs[i].features.template cast<Scalar>().transpose() * d_proj;
    grads.layers[0].noalias() += pairs[i].target_features.template cast<Scalar>().transpose() * d_tproj;
  }
  return grads;
}

/// Summed binary cross-entropy from logits: softplus(l) - y*l per pair.
template <typename Scalar>
Scalar bce_from_logits(std::span<const Scalar> logits, std::span<const int> labels) {
  if (logits.size() != labels.size()) throw std::invalid_argument("bce_loss: length mismatch");
  if (logits.empty()) throw std::invalid_argument("bce_loss: empty batch");
  Scalar loss = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const Scalar l = logits[i];
    loss += std::max(l, Scalar(0)) - static_cast<Scalar>(labels[i]) * l + std::log1p(std::exp(-std::abs(l)));
  }
  return loss;
}

/// -sum y log s + (1-y) log(1-s), evaluated through the logit of s.
template <typename Scalar>
Scalar bce_loss(std::span<const Scalar> scores, std::span<const int> labels) {
  std::vector<Scalar> logits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Scalar s = scores[i];
    if (!(s > Scalar(0) && s < Scalar(1))) throw std::invalid_argument("bce_loss: scores must lie in (0, 1)");
    logits[i] = std::log(s) - std::log1p(-s);
  }
  return bce_from_logits<Scalar>(logits, labels);
}

template <typename Scalar>
struct AdamState {
  std::vector<Matrix<Scalar>> m_layers, v_layers;
  Matrix<Scalar> m_disc, v_disc;
  std::int64_t step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  static AdamState for_params(const ModelParams<Scalar>& p) {
    AdamState s;
    for (const auto& w : p.layers) {
      s.m_layers.push_back(Matrix<Scalar>::Zero(w.rows(), w.cols()));
      s.v_layers.push_back(Matrix<Scalar>::Zero(w.rows(), w.cols()));
    }
    s.m_disc = Matrix<Scalar>::Zero(p.discriminator.rows(), p.discriminator.cols());
    s.v_disc = s.m_disc;
    return s;
  }
};

/// Bias-corrected Adam update of every weight.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& p, const Gradients<Scalar>& g, AdamState<Scalar>& s, Scalar lr) {
  if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient");
  if (g.layers.size() != p.layers.size() || s.m_layers.size() != p.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++s.step;
  const Scalar c1 = Scalar(1) - std::pow(s.beta1, static_cast<Scalar>(s.step));
  const Scalar c2 = Scalar(1) - std::pow(s.beta2, static_cast<Scalar>(s.step));
  auto update = [&](Matrix<Scalar>& w, const Matrix<Scalar>& grad, Matrix<Scalar>& m, Matrix<Scalar>& v) {
    if (grad.rows() != w.rows() || grad.cols() != w.cols()) throw std::invalid_argument("adam_step: shape mismatch");
    m = s.beta1 * m + (Scalar(1) - s.beta1) * grad;
    v = s.beta2 * v + (Scalar(1) - s.beta2) * grad.cwiseAbs2();
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) update(p.layers[l], g.layers[l], s.m_layers[l], s.v_layers[l]);
  update(p.discriminator, g.discriminator, s.m_disc, s.v_disc);
}

}  // namespace cola
