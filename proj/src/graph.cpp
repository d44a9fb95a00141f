#include "fang/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fang {

using json = nlohmann::json;

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Article: return "article";
    case NodeKind::Source: return "source";
    case NodeKind::User: return "user";
  }
  return "?";
}

std::string_view to_string(Stance s) {
  switch (s) {
    case Stance::NeutralSupport: return "neutral_support";
    case Stance::NegativeSupport: return "negative_support";
    case Stance::Deny: return "deny";
    case Stance::Report: return "report";
  }
  return "?";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Followership: return "followership";
    case Relation::Citation: return "citation";
    case Relation::Publication: return "publication";
    case Relation::Stance: return "stance";
  }
  return "?";
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Fake: return "fake";
    case Label::Real: return "real";
    case Label::Unlabeled: return "unlabeled";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "article") return NodeKind::Article;
  if (s == "source") return NodeKind::Source;
  if (s == "user") return NodeKind::User;
  return std::nullopt;
}

std::optional<Stance> parse_stance(std::string_view s) {
  for (int c = 0; c < kNumStances; ++c)
    if (to_string(Stance(c)) == s) return Stance(c);
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
  for (int r = 0; r < kNumRelations; ++r)
    if (to_string(Relation(r)) == s) return Relation(r);
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "fake") return Label::Fake;
  if (s == "real") return Label::Real;
  if (s == "unlabeled" || s.empty()) return Label::Unlabeled;
  return std::nullopt;
}

bool endpoints_allowed(Relation r, NodeKind a, NodeKind b) {
  auto is = [&](NodeKind x, NodeKind y) { return (a == x && b == y) || (a == y && b == x); };
  switch (r) {
    case Relation::Followership: return is(NodeKind::User, NodeKind::User);
    case Relation::Citation: return is(NodeKind::Source, NodeKind::Source);
    case Relation::Publication: return is(NodeKind::Source, NodeKind::Article);
    case Relation::Stance: return is(NodeKind::User, NodeKind::Article);
  }
  return false;
}

NodeIndex SocialGraph::add_node(Node node) {
  if (index_.contains(node.id))
    throw Error(ErrorCategory::DuplicateNode,
                "duplicate node " + std::string(to_string(node.id.kind)) + ":" + node.id.key);
  if (node.id.key.empty()) throw Error(ErrorCategory::MalformedLine, "empty node key");
  if (node.id.kind == NodeKind::User && node.label != Label::Unlabeled)
    throw Error(ErrorCategory::MalformedLine, "users carry no label: " + node.id.key);
  const auto idx = static_cast<NodeIndex>(nodes_.size());
  index_.emplace(node.id, idx);
  kind_counts_[std::size_t(node.id.kind)]++;
  nodes_.push_back(std::move(node));
  for (auto& adj : adjacency_) adj.emplace_back();
  stance_edges_.emplace_back();
  return idx;
}

std::optional<NodeIndex> SocialGraph::find(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex SocialGraph::index_of(const NodeId& id) const {
  auto found = find(id);
  if (!found)
    throw Error(ErrorCategory::UnknownNode,
                "unknown node " + std::string(to_string(id.kind)) + ":" + id.key);
  return *found;
}

void SocialGraph::insert_adjacent(Relation r, NodeIndex from, NodeIndex to) {
  auto& list = adjacency_[std::size_t(r)][from];
  auto less = [&](NodeIndex a, NodeIndex b) { return nodes_[a].id < nodes_[b].id; };
  auto pos = std::lower_bound(list.begin(), list.end(), to, less);
  if (pos != list.end() && *pos == to) return;
  list.insert(pos, to);
}

void SocialGraph::add_edge(Edge edge) {
  if (edge.src >= nodes_.size() || edge.dst >= nodes_.size())
    throw Error(ErrorCategory::DanglingEndpoint, "edge endpoint out of range");
  const NodeKind ks = nodes_[edge.src].id.kind;
  const NodeKind kd = nodes_[edge.dst].id.kind;
  if (!endpoints_allowed(edge.relation, ks, kd))
    throw Error(ErrorCategory::MistypedEdge,
                std::string(to_string(edge.relation)) + " edge cannot join " +
                    std::string(to_string(ks)) + " and " + std::string(to_string(kd)));
  if (edge.src == edge.dst) throw Error(ErrorCategory::SelfLoop, "self-loop on " + nodes_[edge.src].id.key);

  const bool timed = edge.relation == Relation::Publication || edge.relation == Relation::Stance;
  if (timed) {
    if (!edge.elapsed_hours) {
      if (edge.relation == Relation::Stance)
        throw Error(ErrorCategory::MalformedLine, "stance edge requires elapsed_hours");
      edge.elapsed_hours = 0.0;
    }
    if (!std::isfinite(*edge.elapsed_hours))
      throw Error(ErrorCategory::MalformedLine, "elapsed_hours must be finite");
    if (*edge.elapsed_hours < 0.0)
      throw Error(ErrorCategory::NegativeElapsed, "negative elapsed_hours");
  } else if (edge.elapsed_hours) {
    throw Error(ErrorCategory::MalformedLine,
                std::string(to_string(edge.relation)) + " edge carries no elapsed_hours");
  }
  if ((edge.relation == Relation::Stance) != edge.stance.has_value())
    throw Error(ErrorCategory::MalformedLine, "stance field required exactly on stance edges");

  // Canonical orientation: the article is always dst of heterogeneous edges.
  if ((edge.relation == Relation::Publication || edge.relation == Relation::Stance) &&
      ks == NodeKind::Article)
    std::swap(edge.src, edge.dst);

  insert_adjacent(edge.relation, edge.src, edge.dst);
  insert_adjacent(edge.relation, edge.dst, edge.src);
  relation_counts_[std::size_t(edge.relation)]++;
  if (edge.relation == Relation::Stance)
    stance_edges_[edge.dst].push_back(static_cast<std::uint32_t>(edges_.size()));
  edges_.push_back(edge);
}

std::vector<NodeIndex> SocialGraph::neighbors(NodeIndex i, RelationSet relations) const {
  std::vector<NodeIndex> out;
  for (int r = 0; r < kNumRelations; ++r) {
    if (!relations.contains(Relation(r))) continue;
    const auto& adj = adjacency_[std::size_t(r)].at(i);
    out.insert(out.end(), adj.begin(), adj.end());
  }
  std::sort(out.begin(), out.end(),
            [&](NodeIndex a, NodeIndex b) { return nodes_[a].id < nodes_[b].id; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NodeIndex> SocialGraph::nodes_of_kind(NodeKind kind) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id.kind == kind) out.push_back(i);
  return out;
}

std::optional<NodeIndex> SocialGraph::publisher(NodeIndex article) const {
  const auto& adj = adjacency_[std::size_t(Relation::Publication)].at(article);
  if (nodes_[article].id.kind != NodeKind::Article || adj.empty()) return std::nullopt;
  return adj.front();
}

namespace {

json parse_json_line(std::string_view line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw Error(ErrorCategory::MalformedLine, "record is not an object", line_no);
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": " + e.what(), line_no);
  }
}

std::string required_string(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string())
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": missing string field '" + field + "'", line_no);
  return it->get<std::string>();
}

std::string optional_string(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string())
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": field '" + field + "' must be a string", line_no);
  return it->get<std::string>();
}

NodeKind required_kind(const json& j, const char* field, std::size_t line_no) {
  auto kind = parse_node_kind(required_string(j, field, line_no));
  if (!kind)
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": unknown node kind in '" + field + "'", line_no);
  return *kind;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, line_no);
  }
}

}  // namespace

Node parse_entity_record(std::string_view line, std::size_t line_no) {
  const json j = parse_json_line(line, line_no);
  Node node;
  node.id.kind = required_kind(j, "kind", line_no);
  node.id.key = required_string(j, "key", line_no);
  auto label = parse_label(optional_string(j, "label", line_no));
  if (!label)
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": label must be fake, real or unlabeled", line_no);
  node.label = *label;
  node.text = optional_string(j, "text", line_no);
  node.title = optional_string(j, "title", line_no);
  if (node.id.kind != NodeKind::Article && !node.title.empty())
    throw Error(ErrorCategory::MalformedLine,
                "line " + std::to_string(line_no) + ": only articles carry a title", line_no);
  return node;
}

void add_edge_record(SocialGraph& g, std::string_view line, std::size_t line_no) {
  const json j = parse_json_line(line, line_no);
  const std::string where = "line " + std::to_string(line_no) + ": ";
  NodeId src{required_kind(j, "src_kind", line_no), required_string(j, "src_key", line_no)};
  NodeId dst{required_kind(j, "dst_kind", line_no), required_string(j, "dst_key", line_no)};
  auto relation = parse_relation(required_string(j, "label", line_no));
  if (!relation) throw Error(ErrorCategory::MalformedLine, where + "unknown edge label", line_no);

  Edge edge;
  edge.relation = *relation;
  if (auto s = optional_string(j, "stance", line_no); !s.empty()) {
    edge.stance = parse_stance(s);
    if (!edge.stance) throw Error(ErrorCategory::MalformedLine, where + "unknown stance '" + s + "'", line_no);
  }
  if (auto it = j.find("elapsed_hours"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw Error(ErrorCategory::MalformedLine, where + "elapsed_hours must be a number", line_no);
    edge.elapsed_hours = it->get<double>();
  }

  auto s = g.find(src);
  auto d = g.find(dst);
  if (!s || !d) {
    const NodeId& missing = s ? dst : src;
    throw Error(ErrorCategory::DanglingEndpoint,
                where + "endpoint " + std::string(to_string(missing.kind)) + ":" + missing.key +
                    " is not a known entity",
                line_no);
  }
  edge.src = *s;
  edge.dst = *d;
  try {
    g.add_edge(edge);
  } catch (const Error& e) {
    throw Error(e.category(), where + e.what(), line_no);
  }
}

SocialGraph load_graph(const std::filesystem::path& entities_path,
                       const std::filesystem::path& edges_path) {
  SocialGraph g;
  for_each_line(entities_path, [&](const std::string& line, std::size_t line_no) {
    Node node = parse_entity_record(line, line_no);
    try {
      g.add_node(std::move(node));
    } catch (const Error& e) {
      throw Error(e.category(), "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  });
  for_each_line(edges_path, [&](const std::string& line, std::size_t line_no) {
    add_edge_record(g, line, line_no);
  });
  return g;
}

void save_graph(const SocialGraph& g, const std::filesystem::path& entities_path,
                const std::filesystem::path& edges_path) {
  std::ofstream ent(entities_path);
  std::ofstream edg(edges_path);
  if (!ent || !edg) throw Error(ErrorCategory::Io, "cannot write graph files");
  for (const Node& n : g.nodes()) {
    json j;
    j["kind"] = to_string(n.id.kind);
    j["key"] = n.id.key;
    if (n.id.kind != NodeKind::User) j["label"] = to_string(n.label);
    j["text"] = n.text;
    if (n.id.kind == NodeKind::Article) j["title"] = n.title;
    ent << j.dump() << '\n';
  }
  for (const Edge& e : g.edges()) {
    const Node& s = g.node(e.src);
    const Node& d = g.node(e.dst);
    json j;
    j["src_kind"] = to_string(s.id.kind);
    j["src_key"] = s.id.key;
    j["dst_kind"] = to_string(d.id.kind);
    j["dst_key"] = d.id.key;
    j["label"] = to_string(e.relation);
    if (e.stance) j["stance"] = to_string(*e.stance);
    if (e.elapsed_hours) j["elapsed_hours"] = *e.elapsed_hours;
    edg << j.dump() << '\n';
  }
}

std::vector<NodeIndex> neighbors(const SocialGraph& g, const NodeId& node, RelationSet relations) {
  return g.neighbors(g.index_of(node), relations);
}

EngagementSeq engagements(const SocialGraph& g, NodeIndex article) {
  if (article >= g.num_nodes() || g.node(article).id.kind != NodeKind::Article)
    throw Error(ErrorCategory::NotAnArticle, "engagements requested for a non-article node");
  EngagementSeq seq;
  seq.article = article;
  // Repeated stance edges between one user and one article are separate
  // engagements, so edges are read directly rather than the deduplicated adjacency.
  for (std::uint32_t ei : g.stance_edges(article)) {
    const Edge& e = g.edges()[ei];
    seq.items.push_back({e.src, *e.stance, *e.elapsed_hours});
  }
  std::stable_sort(seq.items.begin(), seq.items.end(), [&](const Engagement& a, const Engagement& b) {
    if (a.elapsed_hours != b.elapsed_hours) return a.elapsed_hours < b.elapsed_hours;
    return g.node(a.user).id.key < g.node(b.user).id.key;
  });
  return seq;
}

EngagementSeq engagements(const SocialGraph& g, const NodeId& article) {
  return engagements(g, g.index_of(article));
}

SubgraphSplit split_subgraphs(const SocialGraph& g) {
  SubgraphSplit out;
  std::vector<NodeIndex> remap(g.num_nodes());
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    const Node& n = g.node(i);
    remap[i] = n.id.kind == NodeKind::User ? out.users.add_node(n) : out.news_source.add_node(n);
  }
  for (const Edge& e : g.edges()) {
    Edge copy = e;
    copy.src = remap[e.src];
    copy.dst = remap[e.dst];
    switch (e.relation) {
      case Relation::Followership: out.users.add_edge(copy); break;
      case Relation::Citation:
      case Relation::Publication: out.news_source.add_edge(copy); break;
      case Relation::Stance: break;
    }
  }
  return out;
}

GraphSummary summarize(const SocialGraph& g) {
  GraphSummary s;
  s.articles = g.count(NodeKind::Article);
  s.sources = g.count(NodeKind::Source);
  s.users = g.count(NodeKind::User);
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    const Node& n = g.node(i);
    if (n.id.kind != NodeKind::Article) continue;
    if (n.label == Label::Fake) ++s.fake;
    else if (n.label == Label::Real) ++s.real;
    else ++s.unlabeled;
    if (!g.publisher(i)) ++s.articles_without_source;
  }
  s.followership = g.count(Relation::Followership);
  s.citation = g.count(Relation::Citation);
  s.publication = g.count(Relation::Publication);
  s.stance = g.count(Relation::Stance);
  return s;
}

}  // namespace fang
