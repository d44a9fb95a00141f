#pragma once

#include <cmath>

#include "fang/eigen_types.hpp"
#include "fang/error.hpp"

namespace fang {

// One LSTM direction. Gate rows are laid out [input; forget; cell; output],
// each of height `hidden()`.
template <typename Scalar>
struct LstmParams {
  Matrix<Scalar> input_weights;      // 4e x (d + l)
  Matrix<Scalar> recurrent_weights;  // 4e x e
  Vector<Scalar> bias;               // 4e

  Index hidden() const { return recurrent_weights.cols(); }
  Index input_dim() const { return input_weights.cols(); }
};

template <typename Scalar>
struct BiLstmParams {
  LstmParams<Scalar> forward;
  LstmParams<Scalar> backward;
};

template <typename Scalar>
struct AttentionParams {
  Matrix<Scalar> engagement_projection;  // M_e: d x e
  Vector<Scalar> meta_projection;        // M_m: l
};

template <typename Scalar>
struct LstmTrace {
  Matrix<Scalar> gates;   // post-activation gates, 4e x n, in processing order
  Matrix<Scalar> cells;   // e x n, processing order
  Matrix<Scalar> hidden;  // e x n, processing order
};

namespace detail {

template <typename Scalar>
Scalar logistic(Scalar x) {
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-x)) : std::exp(x) / (Scalar(1) + std::exp(x));
}

}  // namespace detail

// Runs one direction with zero initial state. With `reverse` the sequence is
// consumed right-to-left; the returned states are index-aligned with the
// inputs either way.
template <typename Scalar>
Matrix<Scalar> lstm_forward(const LstmParams<Scalar>& p, const Matrix<Scalar>& inputs, bool reverse,
                            LstmTrace<Scalar>* trace = nullptr) {
  const Index e = p.hidden();
  const Index n = inputs.cols();
  if (inputs.rows() != p.input_dim())
    throw Error(ErrorCategory::DimensionMismatch, "LSTM input width does not match parameters");
  const Matrix<Scalar> projected = (p.input_weights * inputs).colwise() + p.bias;
  Matrix<Scalar> out(e, n);
  Matrix<Scalar> gates(4 * e, n), cells(e, n), hidden(e, n);
  Vector<Scalar> h = Vector<Scalar>::Zero(e), c = Vector<Scalar>::Zero(e);
  for (Index step = 0; step < n; ++step) {
    const Index t = reverse ? n - 1 - step : step;
    Vector<Scalar> g = projected.col(t) + p.recurrent_weights * h;
    for (Index r = 0; r < e; ++r) {
      g[r] = detail::logistic(g[r]);
      g[e + r] = detail::logistic(g[e + r]);
      g[2 * e + r] = std::tanh(g[2 * e + r]);
      g[3 * e + r] = detail::logistic(g[3 * e + r]);
    }
    c = g.segment(e, e).cwiseProduct(c) + g.head(e).cwiseProduct(g.segment(2 * e, e));
    h = g.tail(e).cwiseProduct(c.array().tanh().matrix());
    gates.col(step) = g;
    cells.col(step) = c;
    hidden.col(step) = h;
    out.col(t) = h;
  }
  if (trace) *trace = {std::move(gates), std::move(cells), std::move(hidden)};
  return out;
}

// Backpropagation through time. `d_out` is index-aligned with the inputs.
// Parameter gradients accumulate into `grads`; input gradients are written
// to `d_inputs` when given.
template <typename Scalar>
void lstm_backward(const LstmParams<Scalar>& p, const Matrix<Scalar>& inputs, bool reverse,
                   const LstmTrace<Scalar>& trace, const Matrix<Scalar>& d_out, LstmParams<Scalar>& grads,
                   Matrix<Scalar>* d_inputs = nullptr) {
  const Index e = p.hidden();
  const Index n = inputs.cols();
  Matrix<Scalar> d_pre(4 * e, n);  // input-aligned pre-activation gradients
  Vector<Scalar> dh_next = Vector<Scalar>::Zero(e), dc_next = Vector<Scalar>::Zero(e);
  for (Index step = n - 1; step >= 0; --step) {
    const Index t = reverse ? n - 1 - step : step;
    const auto g = trace.gates.col(step);
    const auto i = g.head(e).array();
    const auto f = g.segment(e, e).array();
    const auto cand = g.segment(2 * e, e).array();
    const auto o = g.tail(e).array();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> tc = trace.cells.col(step).array().tanh();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> c_prev =
        step > 0 ? Eigen::Array<Scalar, Eigen::Dynamic, 1>(trace.cells.col(step - 1).array())
                 : Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(e);

    const Eigen::Array<Scalar, Eigen::Dynamic, 1> dh = d_out.col(t).array() + dh_next.array();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> dc = dc_next.array() + dh * o * (Scalar(1) - tc * tc);
    auto col = d_pre.col(t);
    col.head(e) = (dc * cand * i * (Scalar(1) - i)).matrix();
    col.segment(e, e) = (dc * c_prev * f * (Scalar(1) - f)).matrix();
    col.segment(2 * e, e) = (dc * i * (Scalar(1) - cand * cand)).matrix();
    col.tail(e) = (dh * tc * o * (Scalar(1) - o)).matrix();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = p.recurrent_weights.transpose() * col;
  }
  if (n > 1) {
    // h_{step-1} feeds step `step`; reorder d_pre into step order to pair them.
    Matrix<Scalar> d_steps(4 * e, n - 1);
    for (Index step = 1; step < n; ++step) d_steps.col(step - 1) = d_pre.col(reverse ? n - 1 - step : step);
    grads.recurrent_weights.noalias() += d_steps * trace.hidden.leftCols(n - 1).transpose();
  }
  grads.input_weights.noalias() += d_pre * inputs.transpose();
  grads.bias += d_pre.rowwise().sum();
  if (d_inputs) *d_inputs = p.input_weights.transpose() * d_pre;
}

template <typename Scalar>
struct BiLstmStates {
  Matrix<Scalar> forward;   // H^f, e x n
  Matrix<Scalar> backward;  // H^b, e x n, index-aligned with the inputs
};

template <typename Scalar>
BiLstmStates<Scalar> bilstm_encode(const Matrix<Scalar>& inputs, const BiLstmParams<Scalar>& params,
                                   LstmTrace<Scalar>* fwd_trace = nullptr, LstmTrace<Scalar>* bwd_trace = nullptr) {
  if (inputs.cols() == 0) throw Error(ErrorCategory::InvalidArgument, "bilstm_encode: empty sequence");
  return {lstm_forward(params.forward, inputs, false, fwd_trace),
          lstm_forward(params.backward, inputs, true, bwd_trace)};
}

// logit_i = z^T M_e h_i + meta_i^T M_m, with h_i = h^f_i + h^b_i.
template <typename Scalar>
Vector<Scalar> attention_logits(const Vector<Scalar>& query, const Matrix<Scalar>& hidden, const Matrix<Scalar>& metas,
                                const AttentionParams<Scalar>& attn) {
  if (hidden.cols() != metas.cols())
    throw Error(ErrorCategory::DimensionMismatch, "attention: hidden and meta sequences differ in length");
  const Vector<Scalar> q = attn.engagement_projection.transpose() * query;
  return hidden.transpose() * q + metas.transpose() * attn.meta_projection;
}

// Max-shifted softmax.
template <typename Scalar>
Vector<Scalar> softmax(const Vector<Scalar>& logits) {
  if (logits.size() == 0) return logits;
  Vector<Scalar> w = (logits.array() - logits.maxCoeff()).exp().matrix();
  return w / w.sum();
}

template <typename Scalar>
Vector<Scalar> attention_weights(const Vector<Scalar>& query, const Matrix<Scalar>& hidden,
                                 const Matrix<Scalar>& metas, const AttentionParams<Scalar>& attn) {
  if (hidden.cols() == 0) throw Error(ErrorCategory::InvalidArgument, "attention over an empty sequence");
  return softmax<Scalar>(attention_logits(query, hidden, metas, attn));
}

// concat(sum_i w_i h^f_i, sum_i w_i h^b_i); the zero vector of width 2e for
// an empty sequence.
template <typename Scalar>
Vector<Scalar> temporal_representation(const Vector<Scalar>& weights, const Matrix<Scalar>& forward,
                                       const Matrix<Scalar>& backward) {
  const Index e = forward.rows();
  Vector<Scalar> v = Vector<Scalar>::Zero(2 * e);
  if (weights.size() == 0) return v;
  if (forward.cols() != weights.size() || backward.cols() != weights.size())
    throw Error(ErrorCategory::DimensionMismatch, "temporal_representation: misaligned sequences");
  v.head(e) = forward * weights;
  v.tail(e) = backward * weights;
  return v;
}

template <typename Scalar>
Vector<Scalar> news_representation(const Vector<Scalar>& v_temp, const Vector<Scalar>& z_struct) {
  if (v_temp.size() != z_struct.size())
    throw Error(ErrorCategory::DimensionMismatch, "news representation needs 2e = d");
  return v_temp + z_struct;
}

// Everything the backward pass needs from one article's temporal encode.
template <typename Scalar>
struct TemporalCache {
  Matrix<Scalar> inputs;  // (d + l) x n, columns (z_u, meta)
  Matrix<Scalar> metas;
  LstmTrace<Scalar> fwd_trace, bwd_trace;
  BiLstmStates<Scalar> states;
  Vector<Scalar> query;  // structural embedding of the article
  Vector<Scalar> weights;
};

// v_temp for one article from its engaged users' embeddings and metadata.
template <typename Scalar>
Vector<Scalar> temporal_forward(const BiLstmParams<Scalar>& lstm, const AttentionParams<Scalar>& attn,
                                const Vector<Scalar>& query, const Matrix<Scalar>& user_embeddings,
                                const Matrix<Scalar>& metas, TemporalCache<Scalar>* cache = nullptr) {
  const Index e = lstm.forward.hidden();
  if (user_embeddings.cols() != metas.cols())
    throw Error(ErrorCategory::DimensionMismatch, "engagement inputs and metadata differ in length");
  if (user_embeddings.cols() == 0) {
    if (cache) *cache = TemporalCache<Scalar>{};
    return Vector<Scalar>::Zero(2 * e);
  }
  Matrix<Scalar> inputs(user_embeddings.rows() + metas.rows(), user_embeddings.cols());
  inputs.topRows(user_embeddings.rows()) = user_embeddings;
  inputs.bottomRows(metas.rows()) = metas;

  TemporalCache<Scalar> local;
  TemporalCache<Scalar>& c = cache ? *cache : local;
  c.states = bilstm_encode(inputs, lstm, &c.fwd_trace, &c.bwd_trace);
  c.weights = attention_weights<Scalar>(query, c.states.forward + c.states.backward, metas, attn);
  c.inputs = std::move(inputs);
  c.metas = metas;
  c.query = query;
  return temporal_representation<Scalar>(c.weights, c.states.forward, c.states.backward);
}

template <typename Scalar>
void temporal_backward(const BiLstmParams<Scalar>& lstm, const AttentionParams<Scalar>& attn,
                       const TemporalCache<Scalar>& cache, const Vector<Scalar>& d_vtemp,
                       BiLstmParams<Scalar>& lstm_grads, AttentionParams<Scalar>& attn_grads,
                       Vector<Scalar>& d_query, Matrix<Scalar>& d_user_embeddings) {
  const Index n = cache.weights.size();
  const Index e = lstm.forward.hidden();
  if (n == 0) {
    d_user_embeddings.resize(d_user_embeddings.rows(), 0);
    return;
  }
  const auto& hf = cache.states.forward;
  const auto& hb = cache.states.backward;
  const Vector<Scalar> dvf = d_vtemp.head(e), dvb = d_vtemp.tail(e);
  const Vector<Scalar>& w = cache.weights;

  Matrix<Scalar> d_hf = dvf * w.transpose();
  Matrix<Scalar> d_hb = dvb * w.transpose();
  const Vector<Scalar> dw = hf.transpose() * dvf + hb.transpose() * dvb;
  const Vector<Scalar> dlogit = w.cwiseProduct((dw.array() - w.dot(dw)).matrix());

  const Matrix<Scalar> h = hf + hb;
  const Vector<Scalar> q = attn.engagement_projection.transpose() * cache.query;
  const Vector<Scalar> dq = h * dlogit;
  d_hf.noalias() += q * dlogit.transpose();
  d_hb.noalias() += q * dlogit.transpose();
  attn_grads.meta_projection.noalias() += cache.metas * dlogit;
  attn_grads.engagement_projection.noalias() += cache.query * dq.transpose();
  d_query.noalias() += attn.engagement_projection * dq;

  Matrix<Scalar> d_in_f, d_in_b;
  lstm_backward(lstm.forward, cache.inputs, false, cache.fwd_trace, d_hf, lstm_grads.forward, &d_in_f);
  lstm_backward(lstm.backward, cache.inputs, true, cache.bwd_trace, d_hb, lstm_grads.backward, &d_in_b);
  const Index d = cache.inputs.rows() - cache.metas.rows();
  d_user_embeddings = (d_in_f + d_in_b).topRows(d);
}

}  // namespace fang
