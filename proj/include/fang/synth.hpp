#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "fang/config.hpp"
#include "fang/features.hpp"
#include "fang/graph.hpp"

namespace fang {

using StanceMix = std::array<double, kNumStances>;

// Two latent groups drive the generator: sources lean fake or real, users
// lean credulous or skeptical. Index 0 of every per-class pair is fake,
// index 1 real; index 0 of a leaning pair is credulous.
struct SynthConfig {
  std::size_t articles = 1000;
  std::size_t sources = 100;
  std::size_t users = 5000;
  std::uint64_t seed = 0;

  double fake_source_share = 0.45;
  double source_purity = 0.70;  // P(article class = publisher's leaning)
  int citations_per_source = 4;
  double citation_homophily = 0.85;

  double credulous_share = 0.5;
  int follows_per_user = 6;
  double follow_homophily = 0.85;

  double engagements_mean = 24.0;  // per article, Poisson
  int engagements_min = 3;
  std::array<double, 2> credulous_engager{0.55, 0.45};  // P(engager is credulous | class)
  // mix[class][leaning]; skeptics deny fake news, credulous users deny real news
  std::array<std::array<StanceMix, 2>, 2> stance_mix{{
      {{{0.26, 0.10, 0.04, 0.60}, {0.12, 0.19, 0.21, 0.48}}},
      {{{0.17, 0.14, 0.13, 0.56}, {0.34, 0.08, 0.06, 0.52}}},
  }};

  // Engagement times: with the article's burst share an engagement lands in
  // an early burst (exponential, burst_mean_hours), otherwise in a slow tail
  // (exponential, tail_mean_hours). Burst shares are uniform per article.
  std::array<std::array<double, 2>, 2> burst_share{{{0.45, 0.95}, {0.05, 0.55}}};
  double burst_mean_hours = 3.0;
  double tail_mean_hours = 72.0;

  // Text: tokens come from a shared pool, with small class/leaning pools mixed in.
  int shared_vocab = 200;
  int class_vocab = 40;
  int article_tokens = 30;
  int title_tokens = 8;
  int profile_tokens = 12;
  double class_token_rate = 0.02;   // articles
  double source_token_rate = 0.02;  // source profiles
  double leaning_token_rate = 0.12;
  int embedding_dim = 16;

  // Class-level stance mix implied by the leaning mixture.
  StanceMix class_mix(Label cls) const;
  void validate() const;
};

struct SynthDataset {
  SocialGraph graph;
  WordEmbeddingTable embeddings;
};

// Keys are the field names; per-class pairs use _fake/_real suffixes and
// burst ranges burst_share_{fake,real}_{min,max}; stance mixes take four
// comma-separated values, stance_mix_{fake,real}_{credulous,skeptical}.
// Recognised keys are removed from `kv`.
void apply_key_values(SynthConfig& cfg, KeyValues& kv);

SynthDataset synth_generate(const SynthConfig& cfg);

struct SynthPaths {
  std::filesystem::path entities, edges, embeddings;
};
SynthPaths synth_paths(const std::filesystem::path& dir);
SynthPaths write_synth(const SynthConfig& cfg, const std::filesystem::path& dir);

}  // namespace fang
