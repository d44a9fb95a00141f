#include "fang/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "fang/rng.hpp"

namespace fang {

RocResult auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCategory::DimensionMismatch, "auc: scores and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCategory::InvalidArgument, "auc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCategory::InvalidArgument, "auc needs both classes");
  for (double s : scores)
    if (std::isnan(s)) throw Error(ErrorCategory::NonFinite, "auc: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Walk thresholds from high to low; each group of tied scores is one
  // diagonal step, whose trapezoid gives the half credit.
  RocResult r;
  r.points.emplace_back(0.0, 0.0);
  double tp = 0, fp = 0, area = 0;
  for (std::size_t i = 0; i < order.size();) {
    double dtp = 0, dfp = 0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? dtp : dfp) += 1;
      ++j;
    }
    area += dfp * (tp + dtp / 2.0);
    tp += dtp;
    fp += dfp;
    r.points.emplace_back(fp / static_cast<double>(neg), tp / static_cast<double>(pos));
    i = j;
  }
  r.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return r;
}

OpticsOrdering optics_ordering(const Eigen::MatrixXd& points, int min_pts) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (min_pts < 1) throw Error(ErrorCategory::InvalidArgument, "optics: min_pts must be positive");
  if (n < static_cast<std::size_t>(min_pts)) throw Error(ErrorCategory::InvalidArgument, "optics: fewer points than min_pts");
  if (!points.allFinite()) throw Error(ErrorCategory::NonFinite, "optics: non-finite coordinates");

  const Eigen::VectorXd sq = points.colwise().squaredNorm().transpose();
  Eigen::MatrixXd dist = (-2.0 * points.transpose() * points).colwise() + sq;
  dist.rowwise() += sq.transpose();
  dist = dist.cwiseMax(0.0).cwiseSqrt();
  dist.diagonal().setZero();

  const double inf = std::numeric_limits<double>::infinity();
  OpticsOrdering out;
  out.reachability.assign(n, inf);
  out.core_distance.resize(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = dist(static_cast<Index>(i), static_cast<Index>(j));
    std::nth_element(row.begin(), row.begin() + (min_pts - 1), row.end());
    out.core_distance[i] = row[static_cast<std::size_t>(min_pts - 1)];
  }

  std::vector<char> done(n, 0);
  std::size_t next_start = 0;
  for (std::size_t processed = 0; processed < n; ++processed) {
    // Lowest (reachability, index) among pending points; a fresh component
    // starts at the smallest unprocessed index.
    std::size_t p = n;
    for (std::size_t q = 0; q < n; ++q) {
      if (done[q] || out.reachability[q] == inf) continue;
      if (p == n || out.reachability[q] < out.reachability[p]) p = q;
    }
    if (p == n) {
      while (done[next_start]) ++next_start;
      p = next_start;
    }
    done[p] = 1;
    out.order.push_back(p);
    const double core = out.core_distance[p];
    for (std::size_t q = 0; q < n; ++q) {
      if (done[q]) continue;
      const double r = std::max(core, dist(static_cast<Index>(p), static_cast<Index>(q)));
      if (r < out.reachability[q]) out.reachability[q] = r;
    }
  }
  return out;
}

ClusterAssignment extract_clusters(const OpticsOrdering& ordering, double max_eps) {
  ClusterAssignment out;
  out.labels.assign(ordering.reachability.size(), kNoise);
  int current = kNoise;
  for (std::size_t p : ordering.order) {
    if (ordering.reachability[p] > max_eps) {
      if (ordering.core_distance[p] <= max_eps) {
        current = out.num_clusters++;
        out.labels[p] = current;
      } else {
        current = kNoise;
      }
    } else {
      out.labels[p] = current;
    }
  }
  return out;
}

ClusterAssignment optics_cluster(const Eigen::MatrixXd& points, int min_pts, double max_eps) {
  return extract_clusters(optics_ordering(points, min_pts), max_eps);
}

double homogeneity(const ClusterAssignment& assignment, std::span<const int> truth) {
  const std::size_t n = truth.size();
  if (assignment.labels.size() != n) throw Error(ErrorCategory::DimensionMismatch, "homogeneity: length mismatch");
  if (n == 0) return 1.0;
  std::map<int, double> class_count;
  std::map<std::pair<long, int>, double> joint;
  std::map<long, double> cluster_count;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = assignment.labels[i];
    const long k = c == kNoise ? -1 - static_cast<long>(i) : static_cast<long>(c);
    class_count[truth[i]] += 1;
    cluster_count[k] += 1;
    joint[{k, truth[i]}] += 1;
  }
  const double N = static_cast<double>(n);
  double h_c = 0;
  for (const auto& [_, m] : class_count) h_c -= (m / N) * std::log(m / N);
  if (h_c <= 0.0) return 1.0;
  double h_ck = 0;
  for (const auto& [key, m] : joint) h_ck -= (m / N) * std::log(m / cluster_count[key.first]);
  return 1.0 - h_ck / h_c;
}

std::vector<double> default_windows() { return {0.0, 12.0, 36.0, 336.0, std::numeric_limits<double>::infinity()}; }

TimeWindowProfile attention_profile(std::span<const std::vector<double>> elapsed_hours,
                                    std::span<const Eigen::VectorXd> weights, std::span<const int> labels,
                                    std::span<const double> edges) {
  if (elapsed_hours.size() != weights.size() || weights.size() != labels.size())
    throw Error(ErrorCategory::DimensionMismatch, "attention_profile: inputs differ in length");
  if (edges.size() < 2) throw Error(ErrorCategory::InvalidArgument, "attention_profile needs at least one window");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw Error(ErrorCategory::InvalidArgument, "window edges must increase");
  const auto windows = static_cast<Index>(edges.size() - 1);

  TimeWindowProfile out;
  out.edges.assign(edges.begin(), edges.end());
  out.fake = Eigen::VectorXd::Zero(windows);
  out.real = Eigen::VectorXd::Zero(windows);
  for (std::size_t a = 0; a < weights.size(); ++a) {
    const auto& w = weights[a];
    if (w.size() == 0) continue;
    if (static_cast<std::size_t>(w.size()) != elapsed_hours[a].size())
      throw Error(ErrorCategory::DimensionMismatch, "attention_profile: weights and times differ in length");
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(windows);
    for (Index i = 0; i < w.size(); ++i) {
      const double t = elapsed_hours[a][static_cast<std::size_t>(i)];
      // Times past the last edge fold into the final window.
      auto it = std::upper_bound(edges.begin(), edges.end(), t);
      Index k = static_cast<Index>(it - edges.begin()) - 1;
      k = std::clamp<Index>(k, 0, windows - 1);
      mass[k] += w[i];
    }
    if (labels[a]) {
      out.real += mass;
      ++out.real_articles;
    } else {
      out.fake += mass;
      ++out.fake_articles;
    }
  }
  if (out.fake_articles) out.fake /= static_cast<double>(out.fake_articles);
  if (out.real_articles) out.real /= static_cast<double>(out.real_articles);
  return out;
}

TimeWindowProfile attention_profile(const TrainingContext& ctx, const ModelParams<double>& params,
                                    std::span<const NodeIndex> articles, std::span<const double> edges) {
  std::vector<NodeIndex> kept;
  for (NodeIndex a : articles)
    if (!ctx.engagements[a].empty() && ctx.graph->node(a).label != Label::Unlabeled) kept.push_back(a);
  const Inference inf = infer(ctx, params, kept);
  std::vector<std::vector<double>> times;
  std::vector<int> labels;
  for (NodeIndex a : kept) {
    std::vector<double> t;
    for (const auto& e : ctx.engagements[a]) t.push_back(e.elapsed_hours);
    times.push_back(std::move(t));
    labels.push_back(label_value(ctx.graph->node(a).label));
  }
  return attention_profile(times, inf.attention, labels, edges);
}

SourceRepresentations export_source_representations(const TrainingContext& ctx, const ModelParams<double>& params) {
  const SocialGraph& g = *ctx.graph;
  const Eigen::MatrixXd& x = *ctx.features;
  SourceRepresentations out;
  out.sources = g.nodes_of_kind(NodeKind::Source);
  const Eigen::MatrixXd z = encode_nodes(ctx, params, out.sources);
  const Index d = z.rows(), D = x.rows(), n = static_cast<Index>(out.sources.size());
  out.full.resize(d + 2 * D, n);
  out.baseline.resize(d + D, n);
  for (Index i = 0; i < n; ++i) {
    const NodeIndex s = out.sources[static_cast<std::size_t>(i)];
    Eigen::VectorXd published = Eigen::VectorXd::Zero(D);
    for (NodeIndex a : g.adjacent(s, Relation::Publication)) published += x.col(a);
    out.full.col(i) << z.col(i), x.col(s), published;
    out.baseline.col(i) << z.col(i), x.col(s);
  }
  return out;
}

Eigen::VectorXd LogisticModel::decision(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd std_x = (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  return (std_x * weights).array() + bias;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const ProbeConfig& cfg) {
  const Index n = x.rows(), p = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw Error(ErrorCategory::DimensionMismatch, "probe: rows and labels differ");
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || positives == n) throw Error(ErrorCategory::InvalidArgument, "probe: training set has one class");
  if (!(cfg.l2 > 0.0)) throw Error(ErrorCategory::InvalidArgument, "probe: l2 must be positive");

  LogisticModel m;
  m.mean = x.colwise().mean().transpose();
  m.scale = ((x.rowwise() - m.mean.transpose()).colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
  for (Index j = 0; j < p; ++j)
    if (m.scale[j] <= 1e-12) m.scale[j] = 1.0;
  Eigen::MatrixXd a(n, p + 1);
  a.leftCols(p) = (x.rowwise() - m.mean.transpose()).array().rowwise() / m.scale.transpose().array();
  a.col(p).setOnes();
  Eigen::VectorXd t(n);
  for (Index i = 0; i < n; ++i) t[i] = y[static_cast<std::size_t>(i)];

  // Lipschitz constant of the gradient: sigma'' <= 1/4.
  const Eigen::MatrixXd gram = a.transpose() * a / static_cast<double>(n);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / (0.25 * lmax + cfg.l2);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd reg = Eigen::VectorXd::Constant(p + 1, cfg.l2);
  reg[p] = 0.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::VectorXd s = (a * w).unaryExpr([](double v) { return detail::logistic(v); });
    const Eigen::VectorXd grad = a.transpose() * (s - t) / static_cast<double>(n) + reg.cwiseProduct(w);
    if (grad.norm() < cfg.tolerance) break;
    w -= step * grad;
  }
  m.weights = w.head(p);
  m.bias = w[p];
  return m;
}

RocResult linear_probe(const Eigen::MatrixXd& train_x, std::span<const int> train_y, const Eigen::MatrixXd& test_x,
                       std::span<const int> test_y, const ProbeConfig& cfg) {
  if (train_x.cols() != test_x.cols()) throw Error(ErrorCategory::DimensionMismatch, "probe: feature widths differ");
  const LogisticModel m = fit_logistic(train_x, train_y, cfg);
  const Eigen::VectorXd s = m.decision(test_x);
  return auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), test_y);
}

RocResult cross_validated_probe(const Eigen::MatrixXd& x, std::span<const int> y, int folds, std::uint64_t seed,
                                const ProbeConfig& cfg) {
  const Index n = x.rows();
  if (static_cast<std::size_t>(n) != y.size()) throw Error(ErrorCategory::DimensionMismatch, "probe: rows and labels differ");
  if (folds < 2) throw Error(ErrorCategory::InvalidArgument, "probe: at least two folds");
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (int cls : {0, 1}) {
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i)
      if (y[static_cast<std::size_t>(i)] == cls) members.push_back(i);
    if (static_cast<int>(members.size()) < folds)
      throw Error(ErrorCategory::InvalidArgument, "probe: each class needs at least one sample per fold");
    Rng rng(stream_seed(seed, cls ? "real" : "fake", kProbeStream, 0));
    shuffle(std::span<Index>(members), rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold[static_cast<std::size_t>(members[i])] = static_cast<int>(i % folds);
  }
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> tr, te;
    for (Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
    Eigen::MatrixXd xtr = x(tr, Eigen::all), xte = x(te, Eigen::all);
    std::vector<int> ytr;
    for (Index i : tr) ytr.push_back(y[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd s = fit_logistic(xtr, ytr, cfg).decision(xte);
    for (std::size_t k = 0; k < te.size(); ++k) scores[static_cast<std::size_t>(te[k])] = s[static_cast<Index>(k)];
  }
  return auc(scores, y);
}

}  // namespace fang
