#pragma once

#include <filesystem>
#include <ostream>

#include "fang/eval.hpp"
#include "fang/features.hpp"
#include "fang/train.hpp"

namespace fang {

struct DatasetPaths {
  std::filesystem::path entities, edges;
  std::filesystem::path embeddings;  // optional
  std::filesystem::path stop_words;  // optional, built-in list otherwise
};

struct Dataset {
  SocialGraph graph;
  FeatureSpace space;
};

Dataset load_dataset(const DatasetPaths& paths, std::size_t max_vocab);

struct EvalOptions {
  int min_pts = 5;
  double max_eps = 0.5;
  int probe_folds = 5;
  ProbeConfig probe;
};

struct Metrics {
  std::size_t test_articles = 0;
  double test_auc = 0.0;
  double homogeneity = 0.0;
  int clusters = 0;
  double probe_auc_full = 0.0;      // v_s
  double probe_auc_baseline = 0.0;  // v'_s
};

// OPTICS homogeneity of L2-normalized news representations z_a against the
// articles' labels.
double news_homogeneity(const TrainingContext& ctx, const ModelParams<double>& params,
                        std::span<const NodeIndex> articles, const EvalOptions& opts, int* clusters = nullptr);

// Cross-validated probe AUC on source factuality for (v_s, v'_s).
std::pair<double, double> source_probe(const TrainingContext& ctx, const ModelParams<double>& params,
                                       const EvalOptions& opts);

Metrics evaluate_model(const TrainingContext& ctx, const ModelParams<double>& params, const DataSplit& split,
                       const EvalOptions& opts);

void write_train_log(std::ostream& out, std::span<const EpochLog> log);
void write_metrics(std::ostream& out, const Metrics& m);
void write_attention_profile(std::ostream& out, const TimeWindowProfile& p);
void write_representations(std::ostream& out, const SocialGraph& g, std::span<const NodeIndex> keys,
                           const Eigen::MatrixXd& columns);

}  // namespace fang
