#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fang/graph.hpp"
#include "fang/rng.hpp"

namespace fang {

struct NeighborSampleConfig {
  std::vector<int> fanouts{10, 5};  // fanouts[0] applies to the target's own neighbors
  std::uint64_t rng_seed = 0;
};

struct WalkConfig {
  int walk_length = 3;
  int walks_per_node = 5;
  int negatives_per_node = 10;
};

// Relations a node aggregates over in the structural encoder. Stance edges
// never appear here: engagements are consumed by the temporal encoder.
RelationSet structural_relations(NodeKind kind);

// Deterministic per-(node, hop, round) neighbor sampling. A node sampled
// twice in one round always gets the same neighbors, so encoding a single
// node and encoding a whole batch agree exactly.
class NeighborSampler {
 public:
  NeighborSampler(const SocialGraph& g, NeighborSampleConfig cfg, std::uint64_t round = 0);

  int depth() const { return static_cast<int>(cfg_.fanouts.size()); }
  const NeighborSampleConfig& config() const { return cfg_; }
  std::uint64_t round() const { return round_; }
  void set_round(std::uint64_t round) { round_ = round; }
  // Same graph and adjacency, another round; cheap.
  NeighborSampler at_round(std::uint64_t round) const { return rebind(cfg_, round); }
  NeighborSampler rebind(NeighborSampleConfig cfg, std::uint64_t round) const {
    NeighborSampler s = *this;
    s.cfg_ = std::move(cfg);
    s.round_ = round;
    return s;
  }

  std::span<const NodeIndex> structural_neighbors(NodeIndex v) const { return (*adjacency_)[v]; }

  // Sample for hop `hop` (0-based): `fanouts[hop]` draws, without
  // replacement when the neighborhood is large enough, with replacement
  // otherwise; empty for isolated nodes.
  std::vector<NodeIndex> sample(NodeIndex v, int hop) const;

  const SocialGraph& graph() const { return *graph_; }

 private:
  const SocialGraph* graph_;
  NeighborSampleConfig cfg_;
  std::uint64_t round_;
  std::shared_ptr<const std::vector<std::vector<NodeIndex>>> adjacency_;
};

// layers[0] = {node}; layers[k] concatenates the hop-(k-1) samples of every
// entry of layers[k-1], in order.
std::vector<std::vector<NodeIndex>> sample_neighborhood(const SocialGraph& g, NodeIndex node,
                                                       const NeighborSampleConfig& cfg,
                                                       std::uint64_t round = 0);

// Nodes visited by `walks_per_node` uniform walks of `walk_length` steps over
// every relation of `g`, excluding the start node. Sorted, unique.
std::vector<NodeIndex> random_walk_positives(const SocialGraph& g, NodeIndex node,
                                             const WalkConfig& cfg, Rng& rng);

// Unigram^(3/4) negative sampler over one (sub)graph. Degree counts distinct
// neighbors over all relations; isolated nodes count as degree 1 so that
// every node stays drawable.
class NegativeSampler {
 public:
  explicit NegativeSampler(const SocialGraph& g);

  double weight(NodeIndex v) const { return weights_[v]; }

  // `count` draws with replacement, never `node` nor any of `positives`
  // (which must be sorted).
  std::vector<NodeIndex> draw(NodeIndex node, int count, std::span<const NodeIndex> positives,
                              Rng& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

std::vector<NodeIndex> negative_samples(const SocialGraph& g, NodeIndex node, int count,
                                        std::span<const NodeIndex> positives, Rng& rng);

}  // namespace fang
