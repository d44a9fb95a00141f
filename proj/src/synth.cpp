#include "fang/synth.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "fang/config.hpp"
#include "fang/rng.hpp"

namespace fang {

namespace {

double exponential(Rng& rng, double mean) { return -mean * std::log1p(-uniform01(rng)); }

double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  int k = 0;
  for (double p = uniform01(rng); p > limit; p *= uniform01(rng)) ++k;
  return k;
}

template <std::size_t N>
std::size_t categorical(Rng& rng, const std::array<double, N>& probs) {
  double u = uniform01(rng);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return N - 1;
}

std::string padded(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

struct Vocabulary {
  int shared, cls;
  std::string shared_word(std::size_t i) const { return "w" + std::to_string(i); }
  // pool 0/1: fake/real class words; 2/3: credulous/skeptical words
  std::string pool_word(int pool, std::size_t i) const {
    static const char* prefix[] = {"p", "q", "m", "n"};
    return std::string(prefix[pool]) + std::to_string(i);
  }
};

std::string make_text(Rng& rng, const Vocabulary& v, int tokens, int pool, double pool_rate) {
  std::string out;
  for (int i = 0; i < tokens; ++i) {
    if (i) out += ' ';
    if (pool >= 0 && uniform01(rng) < pool_rate)
      out += v.pool_word(pool, uniform_index(rng, static_cast<std::uint64_t>(v.cls)));
    else
      out += v.shared_word(uniform_index(rng, static_cast<std::uint64_t>(v.shared)));
  }
  return out;
}

void link_homophilous(Rng& rng, SocialGraph& g, const std::vector<NodeIndex>& nodes, const std::vector<int>& group,
                      int per_node, double homophily, Relation rel) {
  if (nodes.size() < 2) return;
  std::vector<std::vector<NodeIndex>> members(2);
  for (std::size_t i = 0; i < nodes.size(); ++i) members[static_cast<std::size_t>(group[i])].push_back(static_cast<NodeIndex>(i));
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int k = 0; k < per_node; ++k) {
      int target_group = uniform01(rng) < homophily ? group[i] : 1 - group[i];
      if (members[static_cast<std::size_t>(target_group)].empty()) target_group = 1 - target_group;
      const auto& pool = members[static_cast<std::size_t>(target_group)];
      const NodeIndex j = pool[uniform_index(rng, pool.size())];
      if (j == i) continue;
      const NodeIndex self = static_cast<NodeIndex>(i);
      const std::pair<NodeIndex, NodeIndex> key{std::min(self, j), std::max(self, j)};
      if (!seen.insert(key).second) continue;
      g.add_edge({nodes[i], nodes[j], rel, std::nullopt, std::nullopt});
    }
  }
}

// stance_mix_{fake,real}_{credulous,skeptical} = four comma-separated probabilities
bool parse_stance_mix(SynthConfig& c, const std::string& k, const std::string& v) {
  static const char* names[2][2] = {{"stance_mix_fake_credulous", "stance_mix_fake_skeptical"},
                                    {"stance_mix_real_credulous", "stance_mix_real_skeptical"}};
  for (std::size_t cls = 0; cls < 2; ++cls)
    for (std::size_t lean = 0; lean < 2; ++lean) {
      if (k != names[cls][lean]) continue;
      StanceMix mix{};
      std::stringstream ss(v);
      std::string item;
      int n = 0;
      while (std::getline(ss, item, ',')) {
        if (n == kNumStances) throw Error(ErrorCategory::Config, "bad value for " + k + ": '" + v + "'");
        mix[static_cast<std::size_t>(n++)] = parse_real(k, item);
      }
      if (n != kNumStances) throw Error(ErrorCategory::Config, "bad value for " + k + ": '" + v + "'");
      c.stance_mix[cls][lean] = mix;
      return true;
    }
  return false;
}

}  // namespace

StanceMix SynthConfig::class_mix(Label cls) const {
  const std::size_t c = cls == Label::Real ? 1 : 0;
  const double cred = credulous_engager[c];
  StanceMix out{};
  for (int s = 0; s < kNumStances; ++s) out[s] = cred * stance_mix[c][0][s] + (1.0 - cred) * stance_mix[c][1][s];
  return out;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCategory::Config, "synth: " + m); };
  auto prob = [&](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(what) + " must be a probability");
  };
  if (articles == 0) fail("articles must be positive");
  if (sources == 0) fail("sources must be positive");
  prob(fake_source_share, "fake_source_share");
  prob(source_purity, "source_purity");
  prob(citation_homophily, "citation_homophily");
  prob(credulous_share, "credulous_share");
  prob(follow_homophily, "follow_homophily");
  prob(class_token_rate, "class_token_rate");
  prob(source_token_rate, "source_token_rate");
  prob(leaning_token_rate, "leaning_token_rate");
  for (double p : credulous_engager) prob(p, "credulous_engager");
  for (const auto& per_class : stance_mix)
    for (const auto& mix : per_class) {
      double sum = 0;
      for (double p : mix) {
        prob(p, "stance mix entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) fail("stance mixes must sum to 1");
    }
  for (const auto& range : burst_share) {
    prob(range[0], "burst_share");
    prob(range[1], "burst_share");
    if (range[0] > range[1]) fail("burst_share ranges must be ordered");
  }
  if (citations_per_source < 0 || follows_per_user < 0) fail("link counts must be non-negative");
  if (!(engagements_mean >= 0.0) || engagements_min < 0) fail("engagement counts must be non-negative");
  if (!(burst_mean_hours > 0.0) || !(tail_mean_hours > 0.0)) fail("time means must be positive");
  if (shared_vocab <= 0 || class_vocab <= 0 || embedding_dim <= 0) fail("vocabulary sizes must be positive");
  if (article_tokens < 0 || title_tokens < 0 || profile_tokens < 0) fail("token counts must be non-negative");
}

void apply_key_values(SynthConfig& c, KeyValues& kv) {
  auto count = [](const std::string& k, const std::string& v) {
    const long long n = parse_int(k, v);
    if (n < 0) throw Error(ErrorCategory::Config, "bad value for " + k + ": '" + v + "'");
    return n;
  };
  for (auto it = kv.begin(); it != kv.end();) {
    const std::string& k = it->first;
    const std::string& v = it->second;
    bool used = true;
    if (k == "articles") c.articles = static_cast<std::size_t>(count(k, v));
    else if (k == "sources") c.sources = static_cast<std::size_t>(count(k, v));
    else if (k == "users") c.users = static_cast<std::size_t>(count(k, v));
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(count(k, v));
    else if (k == "fake_source_share") c.fake_source_share = parse_real(k, v);
    else if (k == "source_purity") c.source_purity = parse_real(k, v);
    else if (k == "citations_per_source") c.citations_per_source = static_cast<int>(parse_int(k, v));
    else if (k == "citation_homophily") c.citation_homophily = parse_real(k, v);
    else if (k == "credulous_share") c.credulous_share = parse_real(k, v);
    else if (k == "follows_per_user") c.follows_per_user = static_cast<int>(parse_int(k, v));
    else if (k == "follow_homophily") c.follow_homophily = parse_real(k, v);
    else if (k == "engagements_mean") c.engagements_mean = parse_real(k, v);
    else if (k == "engagements_min") c.engagements_min = static_cast<int>(parse_int(k, v));
    else if (k == "credulous_engager_fake") c.credulous_engager[0] = parse_real(k, v);
    else if (k == "credulous_engager_real") c.credulous_engager[1] = parse_real(k, v);
    else if (k == "burst_share_fake_min") c.burst_share[0][0] = parse_real(k, v);
    else if (k == "burst_share_fake_max") c.burst_share[0][1] = parse_real(k, v);
    else if (k == "burst_share_real_min") c.burst_share[1][0] = parse_real(k, v);
    else if (k == "burst_share_real_max") c.burst_share[1][1] = parse_real(k, v);
    else if (k == "burst_mean_hours") c.burst_mean_hours = parse_real(k, v);
    else if (k == "tail_mean_hours") c.tail_mean_hours = parse_real(k, v);
    else if (k == "shared_vocab") c.shared_vocab = static_cast<int>(parse_int(k, v));
    else if (k == "class_vocab") c.class_vocab = static_cast<int>(parse_int(k, v));
    else if (k == "article_tokens") c.article_tokens = static_cast<int>(parse_int(k, v));
    else if (k == "title_tokens") c.title_tokens = static_cast<int>(parse_int(k, v));
    else if (k == "profile_tokens") c.profile_tokens = static_cast<int>(parse_int(k, v));
    else if (k == "class_token_rate") c.class_token_rate = parse_real(k, v);
    else if (k == "source_token_rate") c.source_token_rate = parse_real(k, v);
    else if (k == "leaning_token_rate") c.leaning_token_rate = parse_real(k, v);
    else if (k == "embedding_dim") c.embedding_dim = static_cast<int>(parse_int(k, v));
    else if (k.rfind("stance_mix_", 0) == 0) used = parse_stance_mix(c, k, v);
    else used = false;
    it = used ? kv.erase(it) : std::next(it);
  }
}

SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(stream_seed(cfg.seed, "synth", kSynthStream, 0));
  const Vocabulary vocab{cfg.shared_vocab, cfg.class_vocab};
  SynthDataset out;
  SocialGraph& g = out.graph;

  // Sources and their citation network.
  std::vector<NodeIndex> sources;
  std::vector<int> source_real;
  for (std::size_t i = 0; i < cfg.sources; ++i) {
    const int real = uniform01(rng) < cfg.fake_source_share ? 0 : 1;
    Node n{{NodeKind::Source, padded('s', i, 4)}, real ? Label::Real : Label::Fake,
           make_text(rng, vocab, cfg.profile_tokens, real, cfg.source_token_rate), ""};
    sources.push_back(g.add_node(std::move(n)));
    source_real.push_back(real);
  }
  link_homophilous(rng, g, sources, source_real, cfg.citations_per_source, cfg.citation_homophily, Relation::Citation);

  // Users and followership.
  std::vector<NodeIndex> users;
  std::vector<int> user_skeptical;
  std::array<std::vector<NodeIndex>, 2> by_leaning;
  for (std::size_t i = 0; i < cfg.users; ++i) {
    const int skeptical = uniform01(rng) < cfg.credulous_share ? 0 : 1;
    Node n{{NodeKind::User, padded('u', i, 5)}, Label::Unlabeled,
           make_text(rng, vocab, cfg.profile_tokens, 2 + skeptical, cfg.leaning_token_rate), ""};
    users.push_back(g.add_node(std::move(n)));
    user_skeptical.push_back(skeptical);
    by_leaning[static_cast<std::size_t>(skeptical)].push_back(users.back());
  }
  link_homophilous(rng, g, users, user_skeptical, cfg.follows_per_user, cfg.follow_homophily, Relation::Followership);

  // Articles, publication and engagements.
  for (std::size_t i = 0; i < cfg.articles; ++i) {
    const std::size_t s = uniform_index(rng, cfg.sources);
    const int real = uniform01(rng) < cfg.source_purity ? source_real[s] : 1 - source_real[s];
    const std::size_t c = static_cast<std::size_t>(real);
    Node n{{NodeKind::Article, padded('a', i, 5)}, real ? Label::Real : Label::Fake,
           make_text(rng, vocab, cfg.article_tokens, real, cfg.class_token_rate),
           make_text(rng, vocab, cfg.title_tokens, real, cfg.class_token_rate)};
    const NodeIndex a = g.add_node(std::move(n));
    g.add_edge({sources[s], a, Relation::Publication, std::nullopt, std::nullopt});

    if (cfg.users == 0) continue;
    const int count = std::max(cfg.engagements_min, poisson(rng, cfg.engagements_mean));
    const auto& range = cfg.burst_share[c];
    const double burst = range[0] + (range[1] - range[0]) * uniform01(rng);
    for (int k = 0; k < count; ++k) {
      std::size_t lean = uniform01(rng) < cfg.credulous_engager[c] ? 0 : 1;
      if (by_leaning[lean].empty()) lean = 1 - lean;
      const auto& pool = by_leaning[lean];
      const NodeIndex u = pool[uniform_index(rng, pool.size())];
      const auto stance = static_cast<Stance>(categorical(rng, cfg.stance_mix[c][lean]));
      const double hours = uniform01(rng) < burst ? exponential(rng, cfg.burst_mean_hours)
                                                  : exponential(rng, cfg.tail_mean_hours);
      g.add_edge({u, a, Relation::Stance, stance, hours});
    }
  }

  // Word vectors for every token the generator can emit.
  out.embeddings = WordEmbeddingTable(cfg.embedding_dim);
  auto add_vec = [&](const std::string& term) {
    Eigen::VectorXd v(cfg.embedding_dim);
    for (int j = 0; j < cfg.embedding_dim; ++j) v[j] = normal(rng) / std::sqrt(static_cast<double>(cfg.embedding_dim));
    out.embeddings.insert(term, v);
  };
  for (int i = 0; i < cfg.shared_vocab; ++i) add_vec(vocab.shared_word(static_cast<std::size_t>(i)));
  for (int pool = 0; pool < 4; ++pool)
    for (int i = 0; i < cfg.class_vocab; ++i) add_vec(vocab.pool_word(pool, static_cast<std::size_t>(i)));
  return out;
}

SynthPaths synth_paths(const std::filesystem::path& dir) {
  return {dir / "entities.jsonl", dir / "edges.jsonl", dir / "embeddings.txt"};
}

SynthPaths write_synth(const SynthConfig& cfg, const std::filesystem::path& dir) {
  const SynthDataset data = synth_generate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create " + dir.string() + ": " + ec.message());
  const SynthPaths paths = synth_paths(dir);
  save_graph(data.graph, paths.entities, paths.edges);
  save_embeddings(data.embeddings, paths.embeddings);
  return paths;
}

}  // namespace fang
