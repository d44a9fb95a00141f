#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fang/eigen_types.hpp"
#include "fang/error.hpp"
#include "fang/sampling.hpp"

namespace fang {

// Mean-aggregator GraphSage weights. Layer k maps concat(self, neighbor
// mean) of width 2*d_{k-1} to d_k; hidden layers use ReLU, the last layer is
// linear and (optionally) L2-normalized.
template <typename Scalar>
struct SageParams {
  std::vector<Matrix<Scalar>> weights;
  bool normalize_output = true;

  int depth() const { return static_cast<int>(weights.size()); }
  Index input_dim() const { return weights.front().cols() / 2; }
  Index output_dim() const { return weights.back().rows(); }
};

// Receptive field of a set of target nodes. layers[K] holds the targets and
// layers[k-1] everything layer k reads; both selection operators are
// |layers[k]| x |layers[k-1]| and indexed by k-1.
struct EncoderPlan {
  std::vector<std::vector<NodeIndex>> layers;
  std::vector<SparseMatrix<double>> self_select;
  std::vector<SparseMatrix<double>> neighbor_mean;
  std::vector<int> column;  // graph node -> column of the output, -1 if not a target

  Index output_column(NodeIndex v) const {
    const int c = v < column.size() ? column[v] : -1;
    if (c < 0) throw Error(ErrorCategory::UnknownNode, "node is not an encoder target");
    return c;
  }
};

EncoderPlan plan_encoder(const NeighborSampler& sampler, std::span<const NodeIndex> targets);

template <typename Scalar>
struct EncoderCache {
  std::vector<Matrix<Scalar>> concat;  // per layer input, 2*d_{k-1} x n_k; concat[0] unused on the sparse path
  SparseMatrix<Scalar> base;           // sparse path: gathered input features, D x n_0
  std::vector<Matrix<Scalar>> pre;     // per layer pre-activation
  Matrix<Scalar> raw;                  // final layer before normalization
  Vector<Scalar> norms;
};

namespace detail {

template <typename Scalar>
void check_encoder_inputs(const SageParams<Scalar>& params, const EncoderPlan& plan, Index rows, Index cols) {
  if (static_cast<int>(plan.layers.size()) != params.depth() + 1)
    throw Error(ErrorCategory::DimensionMismatch, "encoder plan depth does not match parameters");
  if (rows != params.input_dim())
    throw Error(ErrorCategory::DimensionMismatch, "feature dimension " + std::to_string(rows) +
                                                      " does not match encoder input " +
                                                      std::to_string(params.input_dim()));
  for (NodeIndex v : plan.layers.front())
    if (v >= cols) throw Error(ErrorCategory::DimensionMismatch, "missing features for node");
}

// Layers first..K-1 from h (the output of layer first-1, or the raw input
// when first is 0), then the optional output normalization.
template <typename Scalar>
Matrix<Scalar> encoder_layers(const SageParams<Scalar>& params, const EncoderPlan& plan, Matrix<Scalar> h,
                              int first, EncoderCache<Scalar>* cache) {
  const int depth = params.depth();
  for (int k = first; k < depth; ++k) {
    const SparseMatrix<Scalar> self = plan.self_select[k].template cast<Scalar>();
    const SparseMatrix<Scalar> mean = plan.neighbor_mean[k].template cast<Scalar>();
    Matrix<Scalar> concat(2 * h.rows(), self.rows());
    concat.topRows(h.rows()) = h * self.transpose();
    concat.bottomRows(h.rows()) = h * mean.transpose();
    Matrix<Scalar> pre = params.weights[k] * concat;
    h = (k + 1 < depth) ? Matrix<Scalar>(pre.cwiseMax(Scalar(0))) : pre;
    if (cache) {
      cache->concat[k] = std::move(concat);
      cache->pre[k] = std::move(pre);
    }
  }
  if (!params.normalize_output) return h;
  Vector<Scalar> norms = h.colwise().norm().transpose();
  if (cache) {
    cache->raw = h;
    cache->norms = norms;
  }
  for (Index j = 0; j < h.cols(); ++j)
    if (norms[j] > Scalar(0)) h.col(j) /= norms[j];
  return h;
}

}  // namespace detail

template <typename Scalar>
Matrix<Scalar> encoder_forward(const SageParams<Scalar>& params, const EncoderPlan& plan,
                               const Matrix<Scalar>& features, EncoderCache<Scalar>* cache = nullptr) {
  detail::check_encoder_inputs(params, plan, features.rows(), features.cols());
  const auto& base = plan.layers.front();
  Matrix<Scalar> h(features.rows(), static_cast<Index>(base.size()));
  for (std::size_t i = 0; i < base.size(); ++i) h.col(static_cast<Index>(i)) = features.col(base[i]);
  if (cache) {
    cache->concat.assign(static_cast<std::size_t>(params.depth()), {});
    cache->pre.assign(static_cast<std::size_t>(params.depth()), {});
    cache->base.resize(0, 0);
  }
  return detail::encoder_layers(params, plan, std::move(h), 0, cache);
}

// Same result for sparse input features; the first layer never forms the
// dense concat.
template <typename Scalar>
Matrix<Scalar> encoder_forward(const SageParams<Scalar>& params, const EncoderPlan& plan,
                               const SparseMatrix<Scalar>& features, EncoderCache<Scalar>* cache = nullptr) {
  detail::check_encoder_inputs(params, plan, features.rows(), features.cols());
  const auto& base = plan.layers.front();
  const Index d = features.rows();
  std::vector<Eigen::Triplet<Scalar>> entries;
  for (std::size_t i = 0; i < base.size(); ++i)
    for (typename SparseMatrix<Scalar>::InnerIterator it(features, base[i]); it; ++it)
      entries.emplace_back(it.row(), static_cast<Index>(i), it.value());
  SparseMatrix<Scalar> x(d, static_cast<Index>(base.size()));
  x.setFromTriplets(entries.begin(), entries.end());

  const SparseMatrix<Scalar> self = plan.self_select[0].template cast<Scalar>();
  const SparseMatrix<Scalar> mean = plan.neighbor_mean[0].template cast<Scalar>();
  const Matrix<Scalar> wa = params.weights[0].leftCols(d) * x;
  const Matrix<Scalar> wb = params.weights[0].rightCols(d) * x;
  Matrix<Scalar> pre = wa * self.transpose() + wb * mean.transpose();
  Matrix<Scalar> h = params.depth() > 1 ? Matrix<Scalar>(pre.cwiseMax(Scalar(0))) : pre;
  if (cache) {
    cache->concat.assign(static_cast<std::size_t>(params.depth()), {});
    cache->pre.assign(static_cast<std::size_t>(params.depth()), {});
    cache->pre[0] = std::move(pre);
    cache->base = std::move(x);
  }
  return detail::encoder_layers(params, plan, std::move(h), 1, cache);
}

// Accumulates dLoss/dW into `grads` given dLoss/dZ for the plan's targets.
// Features are constants, so nothing is propagated below the first layer.
template <typename Scalar>
void encoder_backward(const SageParams<Scalar>& params, const EncoderPlan& plan,
                      const EncoderCache<Scalar>& cache, const Matrix<Scalar>& d_out,
                      SageParams<Scalar>& grads) {
  const int depth = params.depth();
  Matrix<Scalar> dh = d_out;
  if (params.normalize_output) {
    for (Index j = 0; j < dh.cols(); ++j) {
      const Scalar n = cache.norms[j];
      if (n <= Scalar(0)) {
        dh.col(j).setZero();
        continue;
      }
      const Vector<Scalar> z = cache.raw.col(j) / n;
      dh.col(j) = (d_out.col(j) - z * z.dot(d_out.col(j))) / n;
    }
  }
  for (int k = depth - 1; k >= 0; --k) {
    Matrix<Scalar> dpre = dh;
    if (k + 1 < depth) dpre.array() *= (cache.pre[k].array() > Scalar(0)).template cast<Scalar>();
    if (k == 0 && cache.base.size() > 0) {
      const SparseMatrix<Scalar> self = plan.self_select[0].template cast<Scalar>();
      const SparseMatrix<Scalar> mean = plan.neighbor_mean[0].template cast<Scalar>();
      const Index d = cache.base.rows();
      const Matrix<Scalar> ds = dpre * self, dm = dpre * mean;
      grads.weights[0].leftCols(d).noalias() += ds * cache.base.transpose();
      grads.weights[0].rightCols(d).noalias() += dm * cache.base.transpose();
      break;
    }
    grads.weights[k].noalias() += dpre * cache.concat[k].transpose();
    if (k == 0) break;
    const Matrix<Scalar> dconcat = params.weights[k].transpose() * dpre;
    const Index half = dconcat.rows() / 2;
    const SparseMatrix<Scalar> self = plan.self_select[k].template cast<Scalar>();
    const SparseMatrix<Scalar> mean = plan.neighbor_mean[k].template cast<Scalar>();
    dh = dconcat.topRows(half) * self + dconcat.bottomRows(half) * mean;
  }
}

// z = GraphSage(node) for a single node; identical to the node's column in
// any batched encode that shares the sampler round.
template <typename Scalar>
Vector<Scalar> graphsage_encode(const NeighborSampler& sampler, NodeIndex node, const SageParams<Scalar>& params,
                                const Matrix<Scalar>& features) {
  if (node >= sampler.graph().num_nodes()) throw Error(ErrorCategory::UnknownNode, "graphsage_encode: unknown node");
  if (features.cols() != static_cast<Index>(sampler.graph().num_nodes()))
    throw Error(ErrorCategory::DimensionMismatch, "feature table does not cover every node");
  const NodeIndex targets[] = {node};
  const EncoderPlan plan = plan_encoder(sampler, targets);
  return encoder_forward(params, plan, features).col(0);
}

}  // namespace fang
