#include "fang/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fang/rng.hpp"

namespace fang {

using json = nlohmann::json;

ModelDims ModelDims::from_config(const TrainConfig& cfg, Index input_dim) {
  ModelDims d;
  d.input_dim = input_dim;
  d.dim = cfg.dim;
  d.temporal_hidden = cfg.temporal_hidden;
  d.stance_dim = cfg.stance_dim;
  d.sage_hidden = cfg.sage_hidden;
  d.depth = static_cast<int>(cfg.fanouts.size());
  d.normalize_output = cfg.normalize_output;
  return d;
}

ModelDims dims_of(const ModelParams<double>& p) {
  ModelDims d;
  d.input_dim = p.sage.input_dim();
  d.dim = p.sage.output_dim();
  d.depth = p.sage.depth();
  d.sage_hidden = d.depth > 1 ? p.sage.weights.front().rows() : d.dim;
  d.temporal_hidden = p.lstm.forward.hidden();
  d.stance_dim = p.stance.user[0].rows();
  d.meta_dim = p.attn.meta_projection.size();
  d.normalize_output = p.sage.normalize_output;
  return d;
}

namespace {

template <typename Derived>
void fill_uniform(Eigen::DenseBase<Derived>& t, double limit, Rng& rng) {
  for (Index j = 0; j < t.cols(); ++j)
    for (Index i = 0; i < t.rows(); ++i) t(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
}

double glorot(Index fan_in, Index fan_out) { return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)); }

}  // namespace

ModelParams<double> init_params(const ModelDims& dims, std::uint64_t seed) {
  if (dims.input_dim <= 0 || dims.dim <= 0 || dims.temporal_hidden <= 0 || dims.stance_dim <= 0 || dims.depth < 1)
    throw Error(ErrorCategory::Config, "model dimensions must be positive");
  if (2 * dims.temporal_hidden != dims.dim) throw Error(ErrorCategory::Config, "model needs 2e = d");
  Rng rng(stream_seed(seed, "model", kInitStream, 0));
  ModelParams<double> p;

  p.sage.normalize_output = dims.normalize_output;
  Index in = dims.input_dim;
  for (int k = 0; k < dims.depth; ++k) {
    const Index out = k + 1 < dims.depth ? dims.sage_hidden : dims.dim;
    Eigen::MatrixXd w(out, 2 * in);
    fill_uniform(w, glorot(2 * in, out), rng);
    p.sage.weights.push_back(std::move(w));
    in = out;
  }

  const Index e = dims.temporal_hidden;
  const double r = 1.0 / std::sqrt(static_cast<double>(e));
  for (LstmParams<double>* dir : {&p.lstm.forward, &p.lstm.backward}) {
    dir->input_weights.resize(4 * e, dims.dim + dims.meta_dim);
    dir->recurrent_weights.resize(4 * e, e);
    dir->bias.resize(4 * e);
    fill_uniform(dir->input_weights, r, rng);
    fill_uniform(dir->recurrent_weights, r, rng);
    fill_uniform(dir->bias, r, rng);
    dir->bias.segment(e, e).setOnes();
  }

  p.attn.engagement_projection.resize(dims.dim, e);
  p.attn.meta_projection.resize(dims.meta_dim);
  fill_uniform(p.attn.engagement_projection, r, rng);
  fill_uniform(p.attn.meta_projection, r, rng);

  for (int c = 0; c < kNumStances; ++c) {
    p.stance.user[c].resize(dims.stance_dim, dims.dim);
    fill_uniform(p.stance.user[c], glorot(dims.dim, dims.stance_dim), rng);
  }
  for (int c = 0; c < kNumStances; ++c) {
    p.stance.article[c].resize(dims.stance_dim, dims.dim);
    fill_uniform(p.stance.article[c], glorot(dims.dim, dims.stance_dim), rng);
  }

  p.clf.weights.resize(2 * dims.dim);
  fill_uniform(p.clf.weights, glorot(2 * dims.dim, 1), rng);
  p.clf.bias = Eigen::VectorXd::Zero(1);
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams<double>& params, const KeyValues& config) {
  json tensors = json::object();
  params.visit([&](const std::string& name, const auto& t) {
    json values = json::array();
    for (Index i = 0; i < t.rows(); ++i)
      for (Index j = 0; j < t.cols(); ++j) values.push_back(t(i, j));
    tensors[name] = {{"shape", {t.rows(), t.cols()}}, {"values", std::move(values)}};
  });
  json doc = {{"format", "fang-checkpoint"},
              {"version", 1},
              {"normalize_output", params.sage.normalize_output},
              {"config", config},
              {"tensors", std::move(tensors)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorCategory::Io, "failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::MalformedLine, "checkpoint is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (doc.value("format", "") != "fang-checkpoint") throw Error(ErrorCategory::MalformedLine, "not a checkpoint file");
    Checkpoint ck;
    ck.config = doc.at("config").get<KeyValues>();
    const json& tensors = doc.at("tensors");
    int depth = 0;
    while (tensors.contains("sage.w" + std::to_string(depth))) ++depth;
    if (depth == 0) throw Error(ErrorCategory::MalformedLine, "checkpoint has no encoder layers");
    ck.params.sage.weights.resize(static_cast<std::size_t>(depth));
    ck.params.sage.normalize_output = doc.at("normalize_output").get<bool>();
    ck.params.visit([&](const std::string& name, auto& t) {
      if (!tensors.contains(name)) throw Error(ErrorCategory::MalformedLine, "checkpoint lacks tensor " + name);
      const json& entry = tensors.at(name);
      const auto rows = entry.at("shape").at(0).get<Index>();
      const auto cols = entry.at("shape").at(1).get<Index>();
      const json& values = entry.at("values");
      if (rows < 0 || cols < 0 || static_cast<Index>(values.size()) != rows * cols)
        throw Error(ErrorCategory::MalformedLine, "tensor " + name + " has inconsistent shape");
      using T = std::decay_t<decltype(t)>;
      if (T::ColsAtCompileTime == 1 && cols != 1)
        throw Error(ErrorCategory::MalformedLine, "tensor " + name + " must be a column vector");
      t.resize(rows, cols);
      std::size_t k = 0;
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) t(i, j) = values[k++].get<double>();
    });
    return ck;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::MalformedLine, "checkpoint structure: " + std::string(e.what()));
  }
}

}  // namespace fang
