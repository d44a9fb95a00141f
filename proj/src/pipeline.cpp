#include "fang/pipeline.hpp"

#include <cmath>

#include "fang/config.hpp"

namespace fang {

Dataset load_dataset(const DatasetPaths& paths, std::size_t max_vocab) {
  Dataset ds;
  ds.graph = load_graph(paths.entities, paths.edges);
  WordEmbeddingTable emb = paths.embeddings.empty() ? WordEmbeddingTable() : load_embeddings(paths.embeddings);
  StopWords stop = paths.stop_words.empty() ? default_stop_words() : load_stop_words(paths.stop_words);
  ds.space = build_feature_space(ds.graph, std::move(emb), std::move(stop), max_vocab);
  return ds;
}

double news_homogeneity(const TrainingContext& ctx, const ModelParams<double>& params,
                        std::span<const NodeIndex> articles, const EvalOptions& opts, int* clusters) {
  const Inference inf = infer(ctx, params, articles);
  Eigen::MatrixXd z = inf.z_news;
  for (Index j = 0; j < z.cols(); ++j)
    if (const double n = z.col(j).norm(); n > 0) z.col(j) /= n;
  const ClusterAssignment a = optics_cluster(z, opts.min_pts, opts.max_eps);
  if (clusters) *clusters = a.num_clusters;
  std::vector<int> truth;
  for (NodeIndex v : articles) truth.push_back(label_value(ctx.graph->node(v).label));
  return homogeneity(a, truth);
}

std::pair<double, double> source_probe(const TrainingContext& ctx, const ModelParams<double>& params,
                                       const EvalOptions& opts) {
  const SourceRepresentations reps = export_source_representations(ctx, params);
  std::vector<Index> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < reps.sources.size(); ++i) {
    const Label l = ctx.graph->node(reps.sources[i]).label;
    if (l == Label::Unlabeled) continue;
    rows.push_back(static_cast<Index>(i));
    y.push_back(label_value(l));
  }
  const Eigen::MatrixXd full = reps.full(Eigen::all, rows).transpose();
  const Eigen::MatrixXd base = reps.baseline(Eigen::all, rows).transpose();
  return {cross_validated_probe(full, y, opts.probe_folds, ctx.cfg.seed, opts.probe).auc,
          cross_validated_probe(base, y, opts.probe_folds, ctx.cfg.seed, opts.probe).auc};
}

Metrics evaluate_model(const TrainingContext& ctx, const ModelParams<double>& params, const DataSplit& split,
                       const EvalOptions& opts) {
  Metrics m;
  m.test_articles = split.test.size();
  m.test_auc = evaluate_auc(ctx, params, split.test);
  std::vector<NodeIndex> labeled = split.pool;
  labeled.insert(labeled.end(), split.test.begin(), split.test.end());
  std::sort(labeled.begin(), labeled.end());
  m.homogeneity = news_homogeneity(ctx, params, labeled, opts, &m.clusters);
  std::tie(m.probe_auc_full, m.probe_auc_baseline) = source_probe(ctx, params, opts);
  return m;
}

namespace {

std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

void write_train_log(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,l_prox,l_stance,l_news,l_total,val_auc\n";
  for (const auto& e : log)
    out << e.epoch << ',' << num(e.prox) << ',' << num(e.stance) << ',' << num(e.news) << ',' << num(e.total) << ','
        << num(e.val_auc) << '\n';
}

void write_metrics(std::ostream& out, const Metrics& m) {
  out << "metric,value\n"
      << "test_articles," << m.test_articles << '\n'
      << "test_auc," << num(m.test_auc) << '\n'
      << "homogeneity," << num(m.homogeneity) << '\n'
      << "clusters," << m.clusters << '\n'
      << "probe_auc_full," << num(m.probe_auc_full) << '\n'
      << "probe_auc_baseline," << num(m.probe_auc_baseline) << '\n';
}

void write_attention_profile(std::ostream& out, const TimeWindowProfile& p) {
  out << "class,window_start_h,window_end_h,mass\n";
  for (const auto& [name, v] : {std::pair{"fake", &p.fake}, std::pair{"real", &p.real}})
    for (Index k = 0; k < v->size(); ++k)
      out << name << ',' << num(p.edges[static_cast<std::size_t>(k)]) << ','
          << (std::isinf(p.edges[static_cast<std::size_t>(k) + 1]) ? std::string("inf")
                                                                    : num(p.edges[static_cast<std::size_t>(k) + 1]))
          << ',' << num((*v)[k]) << '\n';
}

void write_representations(std::ostream& out, const SocialGraph& g, std::span<const NodeIndex> keys,
                           const Eigen::MatrixXd& columns) {
  out << "key";
  for (Index j = 0; j < columns.rows(); ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << g.node(keys[i]).id.key;
    for (Index j = 0; j < columns.rows(); ++j) out << ',' << num(columns(j, static_cast<Index>(i)));
    out << '\n';
  }
}

}  // namespace fang
