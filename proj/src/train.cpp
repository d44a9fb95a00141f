#include "fang/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fang/eval.hpp"
#include "fang/rng.hpp"

namespace fang {

namespace {

std::string node_key(const Node& n) {
  std::string k(to_string(n.id.kind));
  k += ':';
  k += n.id.key;
  return k;
}

// Columns of the batch's structural encode, one per distinct node.
struct TargetSet {
  std::vector<NodeIndex> nodes;
  std::vector<int> column;  // graph index -> column, -1 if absent

  explicit TargetSet(std::size_t n) : column(n, -1) {}
  void add(NodeIndex v) {
    if (column[v] < 0) {
      column[v] = static_cast<int>(nodes.size());
      nodes.push_back(v);
    }
  }
  Index at(NodeIndex v) const { return column[v]; }
};

struct ArticlePass {
  NodeIndex article = 0;
  Index col = 0;
  std::vector<Index> user_cols;
  TemporalCache<double> cache;
  Eigen::VectorXd z;  // z_a
};

// Structural encode of every target in one plan, then the temporal pass per
// article. Shared by training and inference.
struct ForwardPass {
  EncoderPlan plan;
  EncoderCache<double> enc_cache;
  Eigen::MatrixXd z;  // d x |targets|, columns in TargetSet order
  std::vector<ArticlePass> articles;
};

void run_forward(const TrainingContext& ctx, const ModelParams<double>& params, const TargetSet& targets,
                 std::span<const NodeIndex> articles, std::uint64_t round, ForwardPass& out, bool keep_cache) {
  const NeighborSampler sampler = ctx.sampler(round);
  out.plan = plan_encoder(sampler, targets.nodes);
  const Eigen::MatrixXd encoded =
      encoder_forward(params.sage, out.plan, ctx.sparse_features, keep_cache ? &out.enc_cache : nullptr);
  // Reorder plan columns (sorted by node) into target order.
  out.z.resize(encoded.rows(), static_cast<Index>(targets.nodes.size()));
  for (std::size_t i = 0; i < targets.nodes.size(); ++i)
    out.z.col(static_cast<Index>(i)) = encoded.col(out.plan.output_column(targets.nodes[i]));

  out.articles.clear();
  out.articles.reserve(articles.size());
  for (NodeIndex a : articles) {
    ArticlePass pass;
    pass.article = a;
    pass.col = targets.at(a);
    const auto& items = ctx.engagements[a];
    Eigen::MatrixXd users(out.z.rows(), static_cast<Index>(items.size()));
    for (std::size_t j = 0; j < items.size(); ++j) {
      pass.user_cols.push_back(targets.at(items[j].user));
      users.col(static_cast<Index>(j)) = out.z.col(pass.user_cols.back());
    }
    const Eigen::VectorXd query = out.z.col(pass.col);
    const Eigen::VectorXd v_temp = temporal_forward(params.lstm, params.attn, query, users, ctx.metas[a], &pass.cache);
    pass.z = news_representation<double>(v_temp, query);
    out.articles.push_back(std::move(pass));
  }
}

}  // namespace

DataSplit split_articles(const SocialGraph& g, const TrainConfig& cfg) {
  DataSplit split;
  for (Label cls : {Label::Fake, Label::Real}) {
    std::vector<NodeIndex> members;
    for (NodeIndex v : g.nodes_of_kind(NodeKind::Article))
      if (g.node(v).label == cls) members.push_back(v);
    Rng rng(stream_seed(cfg.seed, to_string(cls), kSplitStream, 0));
    shuffle(std::span<NodeIndex>(members), rng);
    const auto n = members.size();
    const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_frac * static_cast<double>(n)));
    const auto n_pool = n - std::min(n, n_test);
    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_frac * static_cast<double>(n_pool)));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n - n_pool));
    auto pool_begin = members.begin() + static_cast<std::ptrdiff_t>(n - n_pool);
    split.pool.insert(split.pool.end(), pool_begin, members.end());
    split.train.insert(split.train.end(), pool_begin, pool_begin + static_cast<std::ptrdiff_t>(n_train));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.pool.begin(), split.pool.end());
  return split;
}

NeighborSampler TrainingContext::sampler(std::uint64_t round) const {
  NeighborSampleConfig sc{cfg.fanouts, cfg.seed};
  if (base_sampler && &base_sampler->graph() == graph) return base_sampler->rebind(std::move(sc), round);
  return NeighborSampler(*graph, std::move(sc), round);
}

TrainingContext make_context(const SocialGraph& g, const Eigen::MatrixXd& features, const TrainConfig& cfg) {
  cfg.validate();
  if (features.cols() != static_cast<Index>(g.num_nodes()))
    throw Error(ErrorCategory::DimensionMismatch, "feature table does not cover every node");
  TrainingContext ctx;
  ctx.graph = &g;
  ctx.features = &features;
  ctx.sparse_features = features.sparseView();
  ctx.cfg = cfg;
  ctx.base_sampler = std::make_shared<const NeighborSampler>(g, NeighborSampleConfig{cfg.fanouts, cfg.seed});
  ctx.engagements.resize(g.num_nodes());
  ctx.metas.assign(g.num_nodes(), Eigen::MatrixXd(kMetaDim, 0));
  const double scale = cfg.resolved_time_scale();
  for (NodeIndex a : g.nodes_of_kind(NodeKind::Article)) {
    auto items = engagements(g, a).items;
    if (items.size() > static_cast<std::size_t>(cfg.max_engagements))
      items.resize(static_cast<std::size_t>(cfg.max_engagements));
    Eigen::MatrixXd meta(kMetaDim, static_cast<Index>(items.size()));
    for (std::size_t j = 0; j < items.size(); ++j)
      meta.col(static_cast<Index>(j)) = engagement_meta(items[j], scale, cfg.disable_time);
    ctx.engagements[a] = std::move(items);
    ctx.metas[a] = std::move(meta);
  }
  return ctx;
}

BatchLosses evaluate_batch(const TrainingContext& ctx, const ModelParams<double>& params, const BatchInput& batch,
                           ModelParams<double>* grads) {
  const SocialGraph& g = *ctx.graph;
  const TrainConfig& cfg = ctx.cfg;
  const bool use_stance = !cfg.disable_stance_loss;
  const bool use_prox = !cfg.disable_proximity_loss;

  TargetSet targets(g.num_nodes());
  for (NodeIndex a : batch.articles) {
    if (g.node(a).id.kind != NodeKind::Article) throw Error(ErrorCategory::NotAnArticle, "batch holds a non-article");
    targets.add(a);
    for (const auto& e : ctx.engagements[a]) targets.add(e.user);
  }
  std::vector<NodeIndex> publishers;
  for (NodeIndex a : batch.labeled) {
    const auto s = g.publisher(a);
    if (!s) throw Error(ErrorCategory::MissingSource, "article " + g.node(a).id.key + " has no publishing source");
    publishers.push_back(*s);
    targets.add(*s);
  }
  if (use_prox) {
    for (const auto& an : batch.anchors) {
      targets.add(an.anchor);
      for (NodeIndex v : an.positives) targets.add(v);
      for (NodeIndex v : an.negatives) targets.add(v);
    }
  }
  if (targets.nodes.empty()) return {};

  ForwardPass fwd;
  run_forward(ctx, params, targets, batch.articles, batch.round, fwd, grads != nullptr);
  const Index d = fwd.z.rows();

  std::vector<Index> article_pos(g.num_nodes(), -1);
  Eigen::MatrixXd z_articles(d, static_cast<Index>(fwd.articles.size()));
  for (std::size_t i = 0; i < fwd.articles.size(); ++i) {
    z_articles.col(static_cast<Index>(i)) = fwd.articles[i].z;
    article_pos[fwd.articles[i].article] = static_cast<Index>(i);
  }

  Eigen::MatrixXd dz, dz_articles;
  if (grads) {
    dz = Eigen::MatrixXd::Zero(d, fwd.z.cols());
    dz_articles = Eigen::MatrixXd::Zero(d, z_articles.cols());
  }

  BatchLosses out;
  if (use_prox) {
    std::vector<ProximityAnchor> anchors;
    anchors.reserve(batch.anchors.size());
    for (const auto& an : batch.anchors) {
      if (an.positives.empty()) continue;
      ProximityAnchor pa;
      pa.anchor = targets.at(an.anchor);
      for (NodeIndex v : an.positives) pa.positives.push_back(targets.at(v));
      for (NodeIndex v : an.negatives) pa.negatives.push_back(targets.at(v));
      anchors.push_back(std::move(pa));
    }
    out.prox = proximity_loss<double>(fwd.z, anchors, cfg.q, cfg.literal_proximity_sign, grads ? &dz : nullptr);
  }

  if (use_stance) {
    std::vector<StancePair> pairs;
    for (const auto& pass : fwd.articles) {
      const auto& items = ctx.engagements[pass.article];
      for (std::size_t j = 0; j < items.size(); ++j)
        pairs.push_back({pass.user_cols[j], article_pos[pass.article], items[j].stance});
    }
    StanceGrads<double> sg;
    if (grads) sg = {&grads->stance, &dz, &dz_articles};
    out.stance = stance_loss<double>(fwd.z, z_articles, params.stance, pairs, sg);
  }

  if (!batch.labeled.empty()) {
    std::vector<double> logits;
    std::vector<int> labels;
    for (std::size_t i = 0; i < batch.labeled.size(); ++i) {
      const NodeIndex a = batch.labeled[i];
      if (article_pos[a] < 0) throw Error(ErrorCategory::InvalidArgument, "labeled article is not in the batch");
      const Eigen::VectorXd za = z_articles.col(article_pos[a]);
      const Eigen::VectorXd zs = fwd.z.col(targets.at(publishers[i]));
      logits.push_back(classifier_logit(za, zs, params.clf));
      labels.push_back(label_value(g.node(a).label));
    }
    std::vector<double> d_logits;
    out.news = fake_news_loss_from_logits<double>(logits, labels, grads ? &d_logits : nullptr);
    if (grads) {
      for (std::size_t i = 0; i < batch.labeled.size(); ++i) {
        const Index ai = article_pos[batch.labeled[i]];
        const Index si = targets.at(publishers[i]);
        const double gl = d_logits[i];
        grads->clf.weights.head(d) += gl * z_articles.col(ai);
        grads->clf.weights.tail(d) += gl * fwd.z.col(si);
        grads->clf.bias[0] += gl;
        dz_articles.col(ai) += gl * params.clf.weights.head(d);
        dz.col(si) += gl * params.clf.weights.tail(d);
      }
    }
  }

  out.total = total_loss(out.prox, out.stance, out.news,
                         {cfg.disable_stance_loss, cfg.disable_proximity_loss});
  if (!grads) return out;

  for (std::size_t i = 0; i < fwd.articles.size(); ++i) {
    const auto& pass = fwd.articles[i];
    const Eigen::VectorXd dza = dz_articles.col(static_cast<Index>(i));
    dz.col(pass.col) += dza;  // z_a = v_temp + z_struct
    if (pass.user_cols.empty()) continue;
    Eigen::VectorXd d_query = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd d_users(d, 0);
    temporal_backward(params.lstm, params.attn, pass.cache, dza, grads->lstm, grads->attn, d_query, d_users);
    dz.col(pass.col) += d_query;
    for (std::size_t j = 0; j < pass.user_cols.size(); ++j) dz.col(pass.user_cols[j]) += d_users.col(static_cast<Index>(j));
  }

  // Back to plan column order.
  Eigen::MatrixXd d_plan(d, dz.cols());
  for (std::size_t i = 0; i < targets.nodes.size(); ++i)
    d_plan.col(fwd.plan.output_column(targets.nodes[i])) = dz.col(static_cast<Index>(i));
  encoder_backward(params.sage, fwd.plan, fwd.enc_cache, d_plan, grads->sage);
  return out;
}

ProximitySampler::ProximitySampler(const SocialGraph& g, const TrainConfig& cfg)
    : graph_(&g),
      cfg_(cfg),
      split_(split_subgraphs(g)),
      local_(g.num_nodes()),
      news_source_negatives_(split_.news_source),
      users_negatives_(split_.users) {
  news_source_global_.resize(split_.news_source.num_nodes());
  users_global_.resize(split_.users.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    const Node& n = g.node(v);
    const bool user = n.id.kind == NodeKind::User;
    const SocialGraph& sub = user ? split_.users : split_.news_source;
    local_[v] = sub.index_of(n.id);
    (user ? users_global_ : news_source_global_)[local_[v]] = v;
  }
}

AnchorSample ProximitySampler::sample(NodeIndex anchor, std::uint64_t round) const {
  const Node& n = graph_->node(anchor);
  const bool user = n.id.kind == NodeKind::User;
  const SocialGraph& sub = user ? split_.users : split_.news_source;
  const auto& global = user ? users_global_ : news_source_global_;
  const NegativeSampler& negs = user ? users_negatives_ : news_source_negatives_;

  Rng rng(stream_seed(cfg_.seed, node_key(n), kWalkStream, round));
  const WalkConfig walk{cfg_.walk_length, cfg_.walks_per_node, cfg_.negatives_per_node};
  const auto positives = random_walk_positives(sub, local_[anchor], walk, rng);
  AnchorSample out;
  out.anchor = anchor;
  for (NodeIndex p : positives) out.positives.push_back(global[p]);
  if (positives.empty()) return out;
  // Too small a subgraph leaves the anchor with positives only.
  if (sub.num_nodes() > positives.size() + 1)
    for (NodeIndex q : negs.draw(local_[anchor], cfg_.negatives_per_node, positives, rng))
      out.negatives.push_back(global[q]);
  return out;
}

Inference infer(const TrainingContext& ctx, const ModelParams<double>& params, std::span<const NodeIndex> articles,
                std::uint64_t round) {
  const SocialGraph& g = *ctx.graph;
  TargetSet targets(g.num_nodes());
  std::vector<std::optional<NodeIndex>> publishers;
  for (NodeIndex a : articles) {
    if (a >= g.num_nodes() || g.node(a).id.kind != NodeKind::Article)
      throw Error(ErrorCategory::NotAnArticle, "inference target is not an article");
    targets.add(a);
    for (const auto& e : ctx.engagements[a]) targets.add(e.user);
    publishers.push_back(g.publisher(a));
    if (publishers.back()) targets.add(*publishers.back());
  }
  Inference out;
  out.articles.assign(articles.begin(), articles.end());
  const Index d = params.sage.output_dim();
  out.z_struct.resize(d, static_cast<Index>(articles.size()));
  out.z_news.resize(d, static_cast<Index>(articles.size()));
  out.probability.resize(static_cast<Index>(articles.size()));
  if (articles.empty()) return out;

  ForwardPass fwd;
  run_forward(ctx, params, targets, articles, round, fwd, false);
  for (std::size_t i = 0; i < articles.size(); ++i) {
    const auto& pass = fwd.articles[i];
    out.z_struct.col(static_cast<Index>(i)) = fwd.z.col(pass.col);
    out.z_news.col(static_cast<Index>(i)) = pass.z;
    out.attention.push_back(pass.cache.weights);
    out.probability[static_cast<Index>(i)] =
        publishers[i] ? predict_article<double>(pass.z, fwd.z.col(targets.at(*publishers[i])), params.clf)
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Eigen::MatrixXd encode_nodes(const TrainingContext& ctx, const ModelParams<double>& params,
                             std::span<const NodeIndex> nodes, std::uint64_t round) {
  const NeighborSampler sampler = ctx.sampler(round);
  const EncoderPlan plan = plan_encoder(sampler, nodes);
  const Eigen::MatrixXd encoded = encoder_forward(params.sage, plan, ctx.sparse_features);
  Eigen::MatrixXd out(encoded.rows(), static_cast<Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) out.col(static_cast<Index>(i)) = encoded.col(plan.output_column(nodes[i]));
  return out;
}

Adam::Adam(const ModelParams<double>& like, const TrainConfig& cfg)
    : lr(cfg.learning_rate),
      beta1(cfg.beta1),
      beta2(cfg.beta2),
      epsilon(cfg.adam_epsilon),
      m(zeros_like(like)),
      v(zeros_like(like)) {}

void Adam::step(ModelParams<double>& params, const ModelParams<double>& grads) {
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  std::vector<double*> p, mm, vv;
  std::vector<const double*> gg;
  std::vector<Index> sizes;
  params.visit([&](const std::string&, auto& x) {
    p.push_back(x.data());
    sizes.push_back(x.size());
  });
  m.visit([&](const std::string&, auto& x) { mm.push_back(x.data()); });
  v.visit([&](const std::string&, auto& x) { vv.push_back(x.data()); });
  grads.visit([&](const std::string&, const auto& x) { gg.push_back(x.data()); });
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (Index i = 0; i < sizes[k]; ++i) {
      const double gi = gg[k][i];
      mm[k][i] = beta1 * mm[k][i] + (1.0 - beta1) * gi;
      vv[k][i] = beta2 * vv[k][i] + (1.0 - beta2) * gi * gi;
      p[k][i] -= lr * (mm[k][i] / c1) / (std::sqrt(vv[k][i] / c2) + epsilon);
    }
  }
}

double evaluate_auc(const TrainingContext& ctx, const ModelParams<double>& params,
                    std::span<const NodeIndex> articles) {
  const Inference inf = infer(ctx, params, articles);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    const double p = inf.probability[static_cast<Index>(i)];
    if (std::isnan(p))
      throw Error(ErrorCategory::MissingSource, "article " + ctx.graph->node(articles[i]).id.key + " has no source");
    scores.push_back(p);
    labels.push_back(label_value(ctx.graph->node(articles[i]).label));
  }
  return auc(scores, labels).auc;
}

TrainResult train(const TrainingContext& ctx, const DataSplit& split, const EpochCallback& on_epoch) {
  const SocialGraph& g = *ctx.graph;
  const TrainConfig& cfg = ctx.cfg;
  if (split.train.empty()) throw Error(ErrorCategory::InvalidArgument, "no labeled training articles");
  for (const auto* set : {&split.train, &split.test})
    for (NodeIndex a : *set) {
      if (g.node(a).label == Label::Unlabeled)
        throw Error(ErrorCategory::InvalidArgument, "split holds an unlabeled article");
      if (!g.publisher(a))
        throw Error(ErrorCategory::MissingSource, "article " + g.node(a).id.key + " has no publishing source");
    }

  TrainResult result;
  result.params = init_params(ModelDims::from_config(cfg, ctx.features->rows()), cfg.seed);
  Adam adam(result.params, cfg);
  const ProximitySampler prox(g, cfg);

  std::vector<char> is_train(g.num_nodes(), 0);
  for (NodeIndex a : split.train) is_train[a] = 1;
  std::vector<NodeIndex> articles = g.nodes_of_kind(NodeKind::Article);
  std::vector<NodeIndex> entities(g.num_nodes());
  std::iota(entities.begin(), entities.end(), NodeIndex{0});

  const std::size_t T = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t n_batches = std::max<std::size_t>(1, (articles.size() + T - 1) / T);
  std::uint64_t step = 0;
  double best_auc = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(stream_seed(cfg.seed, "epoch", kShuffleStream, static_cast<std::uint64_t>(epoch)));
    shuffle(std::span<NodeIndex>(articles), rng);
    shuffle(std::span<NodeIndex>(entities), rng);

    EpochLog log;
    log.epoch = epoch;
    std::size_t anchor_cursor = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      ++step;
      BatchInput batch;
      batch.round = step;
      const std::size_t lo = b * T, hi = std::min(articles.size(), lo + T);
      for (std::size_t i = lo; i < hi; ++i) {
        batch.articles.push_back(articles[i]);
        if (is_train[articles[i]]) batch.labeled.push_back(articles[i]);
      }
      if (!cfg.disable_proximity_loss) {
        std::size_t count;
        if (cfg.anchors_per_batch > 0) {
          count = static_cast<std::size_t>(cfg.anchors_per_batch);
        } else {
          const std::size_t end = (b + 1) * entities.size() / n_batches;
          count = end - anchor_cursor;
        }
        for (std::size_t i = 0; i < count; ++i) {
          const NodeIndex r = entities[(anchor_cursor + i) % entities.size()];
          AnchorSample s = prox.sample(r, step);
          if (!s.positives.empty()) batch.anchors.push_back(std::move(s));
        }
        anchor_cursor += count;
      }
      ModelParams<double> grads = zeros_like(result.params);
      const BatchLosses l = evaluate_batch(ctx, result.params, batch, &grads);
      adam.step(result.params, grads);
      log.prox += l.prox / static_cast<double>(n_batches);
      log.stance += l.stance / static_cast<double>(n_batches);
      log.news += l.news / static_cast<double>(n_batches);
      log.total += l.total / static_cast<double>(n_batches);
    }

    log.val_auc = split.test.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : evaluate_auc(ctx, result.params, split.test);
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    if (log.val_auc > best_auc) {
      best_auc = log.val_auc;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace fang
