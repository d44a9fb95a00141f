#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fang/config.hpp"
#include "fang/graph.hpp"
#include "fang/model.hpp"
#include "fang/sampling.hpp"

namespace fang {

// Stratified article split. `test` is the held-out evaluation set (a
// test_frac share of each class); `train` is a train_frac share of what is
// left, again per class. Labels follow y = 1 for real, 0 for fake.
struct DataSplit {
  std::vector<NodeIndex> train;
  std::vector<NodeIndex> test;
  std::vector<NodeIndex> pool;  // every non-test labeled article
};

DataSplit split_articles(const SocialGraph& g, const TrainConfig& cfg);

inline int label_value(Label l) { return l == Label::Real ? 1 : 0; }

// Immutable per-run inputs: graph, node features and the truncated,
// featurized engagement sequence of every article.
struct TrainingContext {
  const SocialGraph* graph = nullptr;
  const Eigen::MatrixXd* features = nullptr;
  SparseMatrix<double> sparse_features;  // same values; what the encoder reads
  TrainConfig cfg;
  std::vector<std::vector<Engagement>> engagements;  // per node; only articles are non-empty
  std::vector<Eigen::MatrixXd> metas;                // kMetaDim x n per node
  std::shared_ptr<const NeighborSampler> base_sampler;  // adjacency built once

  NeighborSampler sampler(std::uint64_t round) const;
};

TrainingContext make_context(const SocialGraph& g, const Eigen::MatrixXd& features, const TrainConfig& cfg);

struct AnchorSample {
  NodeIndex anchor = 0;
  std::vector<NodeIndex> positives;
  std::vector<NodeIndex> negatives;
};

struct BatchInput {
  std::vector<NodeIndex> articles;  // encoded, and contribute stance pairs
  std::vector<NodeIndex> labeled;   // subset scored by the news loss
  std::vector<AnchorSample> anchors;
  std::uint64_t round = 0;
};

struct BatchLosses {
  double prox = 0.0;
  double stance = 0.0;
  double news = 0.0;
  double total = 0.0;
};

// One forward evaluation of the total loss; with `grads` the exact gradient
// of `total` is accumulated into it.
BatchLosses evaluate_batch(const TrainingContext& ctx, const ModelParams<double>& params, const BatchInput& batch,
                           ModelParams<double>* grads = nullptr);

// Positive and negative sets for proximity anchors, drawn inside the
// anchor's own subgraph (news-source or user).
class ProximitySampler {
 public:
  ProximitySampler(const SocialGraph& g, const TrainConfig& cfg);
  AnchorSample sample(NodeIndex anchor, std::uint64_t round) const;

 private:
  const SocialGraph* graph_;
  TrainConfig cfg_;
  SubgraphSplit split_;
  std::vector<NodeIndex> local_;  // graph index -> index in its subgraph
  std::vector<NodeIndex> news_source_global_, users_global_;
  NegativeSampler news_source_negatives_, users_negatives_;
};

struct Inference {
  std::vector<NodeIndex> articles;
  Eigen::MatrixXd z_struct;       // d x n
  Eigen::MatrixXd z_news;         // d x n, z_a = v_temp + z_struct
  Eigen::VectorXd probability;    // probability real; NaN without a publisher
  std::vector<Eigen::VectorXd> attention;
};

Inference infer(const TrainingContext& ctx, const ModelParams<double>& params, std::span<const NodeIndex> articles,
                std::uint64_t round = 0);

// Structural embeddings for arbitrary nodes, one column each.
Eigen::MatrixXd encode_nodes(const TrainingContext& ctx, const ModelParams<double>& params,
                             std::span<const NodeIndex> nodes, std::uint64_t round = 0);

struct Adam {
  double lr, beta1, beta2, epsilon;
  ModelParams<double> m, v;
  std::uint64_t t = 0;

  Adam(const ModelParams<double>& like, const TrainConfig& cfg);
  void step(ModelParams<double>& params, const ModelParams<double>& grads);
};

struct EpochLog {
  int epoch = 0;
  double prox = 0.0, stance = 0.0, news = 0.0, total = 0.0;
  double val_auc = 0.0;
};

struct TrainResult {
  ModelParams<double> params;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const TrainingContext& ctx, const DataSplit& split, const EpochCallback& on_epoch = {});

// AUC of the model on `articles` (all labeled, both classes present).
double evaluate_auc(const TrainingContext& ctx, const ModelParams<double>& params,
                    std::span<const NodeIndex> articles);

}  // namespace fang
