#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fang/graph.hpp"
#include "fang/model.hpp"
#include "fang/rng.hpp"
#include "fang/train.hpp"

namespace fang::test {

inline Node article(const std::string& key, Label label, std::string text = "", std::string title = "") {
  return Node{{NodeKind::Article, key}, label, std::move(text), std::move(title)};
}
inline Node source(const std::string& key, Label label = Label::Unlabeled, std::string text = "") {
  return Node{{NodeKind::Source, key}, label, std::move(text), ""};
}
inline Node user(const std::string& key, std::string text = "") {
  return Node{{NodeKind::User, key}, Label::Unlabeled, std::move(text), ""};
}

inline void follow(SocialGraph& g, NodeIndex a, NodeIndex b) {
  g.add_edge({a, b, Relation::Followership, std::nullopt, std::nullopt});
}
inline void cite(SocialGraph& g, NodeIndex a, NodeIndex b) {
  g.add_edge({a, b, Relation::Citation, std::nullopt, std::nullopt});
}
inline void publish(SocialGraph& g, NodeIndex s, NodeIndex a) {
  g.add_edge({s, a, Relation::Publication, std::nullopt, 0.0});
}
inline void engage(SocialGraph& g, NodeIndex u, NodeIndex a, Stance s, double hours) {
  g.add_edge({u, a, Relation::Stance, s, hours});
}

// a1 (fake), a2 (real), s1 publishing both, u1-u2-u3 following in a chain,
// and five engagements.
struct SixNodes {
  SocialGraph g;
  NodeIndex a1, a2, s1, u1, u2, u3;
};

inline SixNodes six_nodes() {
  SixNodes f;
  auto& g = f.g;
  f.a1 = g.add_node(article("a1", Label::Fake, "shocking claim", "claim"));
  f.a2 = g.add_node(article("a2", Label::Real, "measured report", "report"));
  f.s1 = g.add_node(source("s1", Label::Real, "daily news"));
  f.u1 = g.add_node(user("u1", "reader"));
  f.u2 = g.add_node(user("u2", "skeptic"));
  f.u3 = g.add_node(user("u3", "sharer"));
  publish(g, f.s1, f.a1);
  publish(g, f.s1, f.a2);
  follow(g, f.u1, f.u2);
  follow(g, f.u2, f.u3);
  engage(g, f.u1, f.a1, Stance::Report, 0.5);
  engage(g, f.u2, f.a1, Stance::Deny, 3.0);
  engage(g, f.u3, f.a1, Stance::NegativeSupport, 30.0);
  engage(g, f.u1, f.a2, Stance::NeutralSupport, 1.0);
  engage(g, f.u3, f.a2, Stance::Report, 100.0);
  return f;
}

// Seeded dense features, one column per node.
inline Eigen::MatrixXd random_features(Index dim, std::size_t nodes, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(dim, static_cast<Index>(nodes));
  for (Index j = 0; j < x.size(); ++j) x.data()[j] = 2.0 * uniform01(rng) - 1.0;
  return x;
}

// Small dimension web for exhaustive checks: d = 4, e = 2.
inline TrainConfig small_config() {
  TrainConfig c;
  c.dim = 4;
  c.temporal_hidden = 2;
  c.stance_dim = 3;
  c.sage_hidden = 5;
  c.fanouts = {2, 2};
  c.batch_size = 2;
  c.epochs = 1;
  c.q = 2.0;
  return c;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fang_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fang::test
