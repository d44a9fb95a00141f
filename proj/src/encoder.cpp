#include "fang/encoder.hpp"

#include <algorithm>

namespace fang {

EncoderPlan plan_encoder(const NeighborSampler& sampler, std::span<const NodeIndex> targets) {
  const int depth = sampler.depth();
  const std::size_t n_nodes = sampler.graph().num_nodes();
  EncoderPlan plan;
  plan.layers.resize(static_cast<std::size_t>(depth) + 1);

  std::vector<NodeIndex> top(targets.begin(), targets.end());
  std::sort(top.begin(), top.end());
  top.erase(std::unique(top.begin(), top.end()), top.end());
  for (NodeIndex v : top)
    if (v >= n_nodes) throw Error(ErrorCategory::UnknownNode, "encoder target outside the graph");
  plan.layers[static_cast<std::size_t>(depth)] = std::move(top);

  // samples[k][i]: neighbors read by node i of layer k+1.
  std::vector<std::vector<std::vector<NodeIndex>>> samples(static_cast<std::size_t>(depth));
  for (int k = depth; k >= 1; --k) {
    const auto& upper = plan.layers[static_cast<std::size_t>(k)];
    auto& lower = plan.layers[static_cast<std::size_t>(k - 1)];
    auto& drawn = samples[static_cast<std::size_t>(k - 1)];
    drawn.reserve(upper.size());
    lower = upper;
    for (NodeIndex v : upper) {
      drawn.push_back(sampler.sample(v, depth - k));
      lower.insert(lower.end(), drawn.back().begin(), drawn.back().end());
    }
    std::sort(lower.begin(), lower.end());
    lower.erase(std::unique(lower.begin(), lower.end()), lower.end());
  }

  std::vector<int> position(n_nodes, -1);
  plan.self_select.resize(static_cast<std::size_t>(depth));
  plan.neighbor_mean.resize(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k) {
    const auto& upper = plan.layers[static_cast<std::size_t>(k)];
    const auto& lower = plan.layers[static_cast<std::size_t>(k - 1)];
    for (std::size_t i = 0; i < lower.size(); ++i) position[lower[i]] = static_cast<int>(i);

    std::vector<Eigen::Triplet<double>> self, mean;
    self.reserve(upper.size());
    for (std::size_t i = 0; i < upper.size(); ++i) {
      self.emplace_back(static_cast<int>(i), position[upper[i]], 1.0);
      const auto& nbrs = samples[static_cast<std::size_t>(k - 1)][i];
      const double w = nbrs.empty() ? 0.0 : 1.0 / static_cast<double>(nbrs.size());
      for (NodeIndex u : nbrs) mean.emplace_back(static_cast<int>(i), position[u], w);
    }
    auto& s = plan.self_select[static_cast<std::size_t>(k - 1)];
    auto& m = plan.neighbor_mean[static_cast<std::size_t>(k - 1)];
    s.resize(static_cast<Index>(upper.size()), static_cast<Index>(lower.size()));
    m.resize(static_cast<Index>(upper.size()), static_cast<Index>(lower.size()));
    s.setFromTriplets(self.begin(), self.end());
    m.setFromTriplets(mean.begin(), mean.end());  // repeated draws sum their weights
  }

  plan.column.assign(n_nodes, -1);
  const auto& out = plan.layers.back();
  for (std::size_t i = 0; i < out.size(); ++i) plan.column[out[i]] = static_cast<int>(i);
  return plan;
}

}  // namespace fang
