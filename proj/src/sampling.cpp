#include "fang/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fang {

namespace {

std::uint64_t node_hash(const Node& n) {
  std::string key(to_string(n.id.kind));
  key += ':';
  key += n.id.key;
  return fnv1a64(key);
}

}  // namespace

RelationSet structural_relations(NodeKind kind) {
  switch (kind) {
    case NodeKind::User: return {Relation::Followership};
    case NodeKind::Source: return {Relation::Citation, Relation::Publication};
    case NodeKind::Article: return {Relation::Publication};
  }
  return {};
}

NeighborSampler::NeighborSampler(const SocialGraph& g, NeighborSampleConfig cfg, std::uint64_t round)
    : graph_(&g), cfg_(std::move(cfg)), round_(round) {
  if (cfg_.fanouts.empty()) throw Error(ErrorCategory::Config, "at least one encoder layer is required");
  for (int f : cfg_.fanouts)
    if (f <= 0) throw Error(ErrorCategory::Config, "fanouts must be positive");
  auto adjacency = std::make_shared<std::vector<std::vector<NodeIndex>>>();
  adjacency->reserve(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    adjacency->push_back(g.neighbors(v, structural_relations(g.node(v).id.kind)));
  adjacency_ = std::move(adjacency);
}

std::vector<NodeIndex> NeighborSampler::sample(NodeIndex v, int hop) const {
  const auto& adj = adjacency_->at(v);
  if (adj.empty()) return {};
  const auto fanout = static_cast<std::size_t>(cfg_.fanouts.at(static_cast<std::size_t>(hop)));
  Rng rng(stream_seed(cfg_.rng_seed, node_hash(graph_->node(v)),
                      kNeighborStream + 16 * static_cast<std::uint64_t>(hop), round_));
  std::vector<NodeIndex> out;
  out.reserve(fanout);
  if (adj.size() >= fanout) {
    std::vector<NodeIndex> pool(adj.begin(), adj.end());
    for (std::size_t i = 0; i < fanout; ++i) {
      std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
      out.push_back(pool[i]);
    }
  } else {
    for (std::size_t i = 0; i < fanout; ++i) out.push_back(adj[uniform_index(rng, adj.size())]);
  }
  return out;
}

std::vector<std::vector<NodeIndex>> sample_neighborhood(const SocialGraph& g, NodeIndex node,
                                                       const NeighborSampleConfig& cfg,
                                                       std::uint64_t round) {
  if (node >= g.num_nodes()) throw Error(ErrorCategory::UnknownNode, "sample_neighborhood: unknown node");
  NeighborSampler sampler(g, cfg, round);
  std::vector<std::vector<NodeIndex>> layers{{node}};
  for (int hop = 0; hop < sampler.depth(); ++hop) {
    std::vector<NodeIndex> next;
    for (NodeIndex v : layers.back()) {
      auto s = sampler.sample(v, hop);
      next.insert(next.end(), s.begin(), s.end());
    }
    layers.push_back(std::move(next));
  }
  return layers;
}

std::vector<NodeIndex> random_walk_positives(const SocialGraph& g, NodeIndex node,
                                             const WalkConfig& cfg, Rng& rng) {
  if (node >= g.num_nodes()) throw Error(ErrorCategory::UnknownNode, "random walk from unknown node");
  std::vector<NodeIndex> visited;
  for (int w = 0; w < cfg.walks_per_node; ++w) {
    NodeIndex cur = node;
    for (int step = 0; step < cfg.walk_length; ++step) {
      const auto next = g.neighbors(cur, RelationSet::all());
      if (next.empty()) break;
      cur = next[uniform_index(rng, next.size())];
      if (cur != node) visited.push_back(cur);
    }
  }
  std::sort(visited.begin(), visited.end());
  visited.erase(std::unique(visited.begin(), visited.end()), visited.end());
  return visited;
}

NegativeSampler::NegativeSampler(const SocialGraph& g) {
  weights_.resize(g.num_nodes());
  cumulative_.resize(g.num_nodes());
  double total = 0.0;
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    const auto degree = g.neighbors(v, RelationSet::all()).size();
    weights_[v] = std::pow(static_cast<double>(std::max<std::size_t>(degree, 1)), 0.75);
    total += weights_[v];
    cumulative_[v] = total;
  }
}

std::vector<NodeIndex> NegativeSampler::draw(NodeIndex node, int count,
                                             std::span<const NodeIndex> positives, Rng& rng) const {
  const std::size_t n = weights_.size();
  auto excluded = [&](NodeIndex v) {
    return v == node || std::binary_search(positives.begin(), positives.end(), v);
  };
  std::size_t excluded_count = 0;
  for (NodeIndex p : positives) excluded_count += (p != node && p < n);
  excluded_count += node < n;
  if (n <= excluded_count)
    throw Error(ErrorCategory::InvalidArgument, "negative sampling: subgraph too small");

  std::vector<NodeIndex> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const double total = cumulative_.back();
  // Rejection keeps the draw proportional to weight; a fallback over the
  // eligible set bounds the cost when most mass is excluded.
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 32 * std::max(count, 1)) {
    ++attempts;
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto v = static_cast<NodeIndex>(std::min<std::size_t>(it - cumulative_.begin(), n - 1));
    if (!excluded(v)) out.push_back(v);
  }
  if (static_cast<int>(out.size()) < count) {
    std::vector<NodeIndex> eligible;
    std::vector<double> cum;
    double acc = 0.0;
    for (NodeIndex v = 0; v < n; ++v) {
      if (excluded(v)) continue;
      acc += weights_[v];
      eligible.push_back(v);
      cum.push_back(acc);
    }
    while (static_cast<int>(out.size()) < count) {
      const double u = uniform01(rng) * acc;
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      out.push_back(eligible[std::min<std::size_t>(it - cum.begin(), eligible.size() - 1)]);
    }
  }
  return out;
}

std::vector<NodeIndex> negative_samples(const SocialGraph& g, NodeIndex node, int count,
                                        std::span<const NodeIndex> positives, Rng& rng) {
  return NegativeSampler(g).draw(node, count, positives, rng);
}

}  // namespace fang
