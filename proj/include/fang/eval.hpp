#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fang/train.hpp"

namespace fang {

struct RocResult {
  double auc = 0.5;
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), from (0,0) to (1,1)
};

// Mann-Whitney AUC with half credit for ties; positives are label 1.
RocResult auc(std::span<const double> scores, std::span<const int> labels);

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id in [0, num_clusters) or kNoise
  int num_clusters = 0;
};

// Reachability ordering with an unbounded generating radius. Core distance
// is the distance to the min_pts-th closest point, the point itself counted
// first. Ties in the seed list go to the smaller point index.
struct OpticsOrdering {
  std::vector<std::size_t> order;
  std::vector<double> reachability;   // per point; +inf where undefined
  std::vector<double> core_distance;  // per point
};

OpticsOrdering optics_ordering(const Eigen::MatrixXd& points, int min_pts);  // one column per point
ClusterAssignment extract_clusters(const OpticsOrdering& ordering, double max_eps);
ClusterAssignment optics_cluster(const Eigen::MatrixXd& points, int min_pts = 5, double max_eps = 0.5);

// 1 - H(truth | clusters) / H(truth); noise points count as singletons.
double homogeneity(const ClusterAssignment& assignment, std::span<const int> truth);

// Window edges in hours: [0,12), [12,36), [36,336), [336,inf).
std::vector<double> default_windows();

struct TimeWindowProfile {
  std::vector<double> edges;  // size windows + 1, last edge may be +inf
  Eigen::VectorXd fake, real;
  std::size_t fake_articles = 0, real_articles = 0;
};

// Per-article attention mass per window, averaged within each class.
// Articles without engagements are skipped.
TimeWindowProfile attention_profile(std::span<const std::vector<double>> elapsed_hours,
                                    std::span<const Eigen::VectorXd> weights, std::span<const int> labels,
                                    std::span<const double> edges);
TimeWindowProfile attention_profile(const TrainingContext& ctx, const ModelParams<double>& params,
                                    std::span<const NodeIndex> articles, std::span<const double> edges);

struct SourceRepresentations {
  std::vector<NodeIndex> sources;
  Eigen::MatrixXd full;      // concat(z_s, x_s, sum of x_a over published articles), one column per source
  Eigen::MatrixXd baseline;  // concat(z_s, x_s)
};

SourceRepresentations export_source_representations(const TrainingContext& ctx, const ModelParams<double>& params);

struct ProbeConfig {
  double l2 = 0.1;
  int max_iterations = 20000;
  double tolerance = 1e-9;
};

struct LogisticModel {
  Eigen::VectorXd mean, scale;  // standardization fitted on the training rows
  Eigen::VectorXd weights;
  double bias = 0.0;

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const;  // rows are samples
};

// L2-regularized logistic regression by gradient descent with step 1/L on
// standardized features: mean log-loss + l2/2 |w|^2 (bias unpenalized).
LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const ProbeConfig& cfg = {});

RocResult linear_probe(const Eigen::MatrixXd& train_x, std::span<const int> train_y, const Eigen::MatrixXd& test_x,
                       std::span<const int> test_y, const ProbeConfig& cfg = {});

// Stratified k-fold; AUC of the pooled out-of-fold decision values.
RocResult cross_validated_probe(const Eigen::MatrixXd& x, std::span<const int> y, int folds, std::uint64_t seed,
                                const ProbeConfig& cfg = {});

}  // namespace fang
