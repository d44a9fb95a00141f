#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fang/config.hpp"
#include "fang/encoder.hpp"
#include "fang/features.hpp"
#include "fang/objectives.hpp"
#include "fang/temporal.hpp"

namespace fang {

struct ModelDims {
  Index input_dim = 0;  // D_in
  Index dim = 64;       // d
  Index temporal_hidden = 32;
  Index stance_dim = 16;
  Index sage_hidden = 64;
  int depth = 2;
  Index meta_dim = kMetaDim;
  bool normalize_output = true;

  static ModelDims from_config(const TrainConfig& cfg, Index input_dim);
};

// Every trainable tensor.
template <typename Scalar>
struct ModelParams {
  SageParams<Scalar> sage;
  BiLstmParams<Scalar> lstm;
  AttentionParams<Scalar> attn;
  StanceProjections<Scalar> stance;
  ClassifierParams<Scalar> clf;

  // f(name, tensor) over every tensor in a fixed order; tensors are
  // Matrix<Scalar> or Vector<Scalar>.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& p, F& f) {
    for (std::size_t k = 0; k < p.sage.weights.size(); ++k) f("sage.w" + std::to_string(k), p.sage.weights[k]);
    f(std::string("lstm.fwd.wx"), p.lstm.forward.input_weights);
    f(std::string("lstm.fwd.wh"), p.lstm.forward.recurrent_weights);
    f(std::string("lstm.fwd.b"), p.lstm.forward.bias);
    f(std::string("lstm.bwd.wx"), p.lstm.backward.input_weights);
    f(std::string("lstm.bwd.wh"), p.lstm.backward.recurrent_weights);
    f(std::string("lstm.bwd.b"), p.lstm.backward.bias);
    f(std::string("attn.me"), p.attn.engagement_projection);
    f(std::string("attn.mm"), p.attn.meta_projection);
    for (int c = 0; c < kNumStances; ++c) f("stance.a" + std::to_string(c), p.stance.user[c]);
    for (int c = 0; c < kNumStances; ++c) f("stance.b" + std::to_string(c), p.stance.article[c]);
    f(std::string("clf.w"), p.clf.weights);
    f(std::string("clf.b"), p.clf.bias);
  }
};

template <typename Scalar>
ModelParams<Scalar> zeros_like(const ModelParams<Scalar>& p) {
  ModelParams<Scalar> z = p;
  z.visit([](const std::string&, auto& t) { t.setZero(); });
  return z;
}

template <typename Scalar>
Index parameter_count(const ModelParams<Scalar>& p) {
  Index n = 0;
  p.visit([&](const std::string&, const auto& t) { n += t.size(); });
  return n;
}

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p) {
  ModelParams<To> out;
  out.sage.normalize_output = p.sage.normalize_output;
  out.sage.weights.resize(p.sage.weights.size());
  std::vector<const From*> src;
  std::vector<std::pair<Index, Index>> shapes;
  p.visit([&](const std::string&, const auto& t) {
    src.push_back(t.data());
    shapes.emplace_back(t.rows(), t.cols());
  });
  std::size_t i = 0;
  out.visit([&](const std::string&, auto& t) {
    t.resize(shapes[i].first, shapes[i].second);
    for (Index j = 0; j < t.size(); ++j) t.data()[j] = static_cast<To>(src[i][j]);
    ++i;
  });
  return out;
}

ModelDims dims_of(const ModelParams<double>& p);

// Glorot-uniform encoder, stance and classifier weights; LSTM and attention
// uniform in +-1/sqrt(e) with forget-gate bias 1; classifier bias 0.
ModelParams<double> init_params(const ModelDims& dims, std::uint64_t seed);

struct Checkpoint {
  ModelParams<double> params;
  KeyValues config;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams<double>& params, const KeyValues& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fang
