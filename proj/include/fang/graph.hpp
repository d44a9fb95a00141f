#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fang/error.hpp"

namespace fang {

enum class NodeKind : std::uint8_t { Article, Source, User };

// Canonical order is fixed: it is the one-hot layout of engagement metadata.
enum class Stance : std::uint8_t {
  NeutralSupport = 0,
  NegativeSupport = 1,
  Deny = 2,
  Report = 3,
};
inline constexpr int kNumStances = 4;

enum class Relation : std::uint8_t { Followership, Citation, Publication, Stance };
inline constexpr int kNumRelations = 4;

// Ground-truth label. For articles this is credibility; for sources it is
// the (optional) factuality of reporting used by the source probe.
enum class Label : std::uint8_t { Fake, Real, Unlabeled };

std::string_view to_string(NodeKind k);
std::string_view to_string(Stance s);
std::string_view to_string(Relation r);
std::string_view to_string(Label l);
std::optional<NodeKind> parse_node_kind(std::string_view s);
std::optional<Stance> parse_stance(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);
std::optional<Label> parse_label(std::string_view s);

struct NodeId {
  NodeKind kind = NodeKind::Article;
  std::string key;

  auto operator<=>(const NodeId&) const = default;
  bool operator==(const NodeId&) const = default;
};

struct NodeIdHash {
  std::size_t operator()(const NodeId& id) const noexcept {
    return std::hash<std::string>{}(id.key) * 3u + static_cast<std::size_t>(id.kind);
  }
};

using NodeIndex = std::uint32_t;

struct Node {
  NodeId id;
  Label label = Label::Unlabeled;
  std::string text;
  std::string title;
};

struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  Relation relation = Relation::Followership;
  std::optional<Stance> stance;
  std::optional<double> elapsed_hours;
};

class RelationSet {
 public:
  constexpr RelationSet() = default;
  constexpr RelationSet(std::initializer_list<Relation> rs) {
    for (Relation r : rs) bits_ |= bit(r);
  }
  static constexpr RelationSet all() {
    return {Relation::Followership, Relation::Citation, Relation::Publication, Relation::Stance};
  }
  constexpr bool contains(Relation r) const { return (bits_ & bit(r)) != 0; }

 private:
  static constexpr std::uint8_t bit(Relation r) { return std::uint8_t(1u << unsigned(r)); }
  std::uint8_t bits_ = 0;
};

// Heterogeneous social-context graph of articles, sources and users.
//
// Edges are validated on insertion against the interaction typing table:
// followership joins users, citation joins sources, publication joins a
// source to an article, stance joins a user to an article. Followership and
// citation are undirected; publication and stance are stored with the
// article as `dst`. Adjacency per relation is kept unique and sorted by
// node key so that every traversal is reproducible.
class SocialGraph {
 public:
  NodeIndex add_node(Node node);
  void add_edge(Edge edge);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }

  std::optional<NodeIndex> find(const NodeId& id) const;
  NodeIndex index_of(const NodeId& id) const;

  std::span<const NodeIndex> adjacent(NodeIndex i, Relation r) const {
    return adjacency_[std::size_t(r)].at(i);
  }
  std::vector<NodeIndex> neighbors(NodeIndex i, RelationSet relations) const;
  std::vector<NodeIndex> nodes_of_kind(NodeKind kind) const;

  // Publishing source of an article, if it has one.
  std::optional<NodeIndex> publisher(NodeIndex article) const;

  // Indices into edges() of the stance edges incident to an article.
  std::span<const std::uint32_t> stance_edges(NodeIndex article) const {
    return stance_edges_.at(article);
  }

  std::size_t count(NodeKind kind) const { return kind_counts_[std::size_t(kind)]; }
  std::size_t count(Relation r) const { return relation_counts_[std::size_t(r)]; }

 private:
  void insert_adjacent(Relation r, NodeIndex from, NodeIndex to);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, NodeIndex, NodeIdHash> index_;
  std::array<std::vector<std::vector<NodeIndex>>, kNumRelations> adjacency_;
  std::vector<std::vector<std::uint32_t>> stance_edges_;
  std::array<std::size_t, 3> kind_counts_{};
  std::array<std::size_t, kNumRelations> relation_counts_{};
};

// True when (kind(a), kind(b)) is a legal endpoint pair for `r`, in either order.
bool endpoints_allowed(Relation r, NodeKind a, NodeKind b);

struct Engagement {
  NodeIndex user = 0;
  Stance stance = Stance::Report;
  double elapsed_hours = 0.0;
};

struct EngagementSeq {
  NodeIndex article = 0;
  std::vector<Engagement> items;  // ascending elapsed time, ties by user key
};

SocialGraph load_graph(const std::filesystem::path& entities_path,
                       const std::filesystem::path& edges_path);
void save_graph(const SocialGraph& g, const std::filesystem::path& entities_path,
                const std::filesystem::path& edges_path);

// Line-level parsers behind load_graph; `line_no` is only used in errors.
Node parse_entity_record(std::string_view line, std::size_t line_no);
void add_edge_record(SocialGraph& g, std::string_view line, std::size_t line_no);

std::vector<NodeIndex> neighbors(const SocialGraph& g, const NodeId& node, RelationSet relations);
EngagementSeq engagements(const SocialGraph& g, NodeIndex article);
EngagementSeq engagements(const SocialGraph& g, const NodeId& article);

struct SubgraphSplit {
  SocialGraph news_source;
  SocialGraph users;
};
SubgraphSplit split_subgraphs(const SocialGraph& g);

struct GraphSummary {
  std::size_t articles = 0, sources = 0, users = 0;
  std::size_t fake = 0, real = 0, unlabeled = 0;
  std::size_t followership = 0, citation = 0, publication = 0, stance = 0;
  std::size_t articles_without_source = 0;
};
GraphSummary summarize(const SocialGraph& g);

}  // namespace fang
