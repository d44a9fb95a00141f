#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "fang/graph.hpp"

namespace fang {

using StopWords = std::unordered_set<std::string>;

// Built-in English stop-word list (also shipped as data/stopwords_en.txt).
const StopWords& default_stop_words();
StopWords load_stop_words(const std::filesystem::path& path);

// Lowercased ASCII alphanumeric runs; every other byte separates tokens,
// so punctuation and multi-byte codepoints (emoji included) never survive.
std::vector<std::string> tokenize(std::string_view text);

std::string clean_post_text(std::string_view text, const StopWords& stop_words);

// A post is a verbatim report when it equals the title after cleaning.
bool report_stance_rule(std::string_view post, std::string_view title, const StopWords& stop_words);

struct TfIdfModel {
  std::vector<std::string> terms;
  std::vector<std::size_t> document_frequency;
  std::size_t num_documents = 0;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return terms.size(); }
  double idf(std::size_t term) const;
  // tf (raw count) times idf for each vocabulary term in `text`.
  Eigen::VectorXd transform(std::string_view text, const StopWords& stop_words) const;
};

// Vocabulary keeps the `max_vocab` most document-frequent terms (ties by
// term, lexicographically) and is stored in lexicographic order.
TfIdfModel fit_tfidf(std::span<const std::string> corpus, const StopWords& stop_words,
                     std::size_t max_vocab = 5000);

class WordEmbeddingTable {
 public:
  WordEmbeddingTable() = default;
  explicit WordEmbeddingTable(Eigen::Index dim) : dim_(dim) {}

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  void insert(const std::string& term, const Eigen::VectorXd& v);
  // Unknown terms map to the zero vector.
  Eigen::VectorXd lookup(const std::string& term) const;
  const std::unordered_map<std::string, Eigen::VectorXd>& entries() const { return vectors_; }

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

WordEmbeddingTable load_embeddings(const std::filesystem::path& path);
void save_embeddings(const WordEmbeddingTable& table, const std::filesystem::path& path);

// concat(tfidf(text), tfidf-weighted mean of word vectors). The weighted
// mean divides by max(1, total tf-idf mass).
Eigen::VectorXd entity_features(std::string_view text, const TfIdfModel& tfidf,
                                const WordEmbeddingTable& emb, const StopWords& stop_words);

inline constexpr int kMetaDim = 1 + kNumStances;
using MetaVector = Eigen::Matrix<double, kMetaDim, 1>;

// ln(1 + 336): the two-week horizon maps to a time feature of 1.
double default_time_scale();

// (time, one-hot stance). With `disable_time` the time entry is forced to 0.
MetaVector engagement_meta(const Engagement& e, double time_scale, bool disable_time = false);

// Text an entity is featurized from: articles use title and body.
std::string entity_text(const Node& n);

struct FeatureSpace {
  TfIdfModel tfidf;
  WordEmbeddingTable embeddings;
  StopWords stop_words;
  Eigen::MatrixXd features;  // one column per graph node

  Eigen::Index dim() const { return features.rows(); }
};

// Fits the shared vocabulary on every entity text and featurizes all nodes.
FeatureSpace build_feature_space(const SocialGraph& g, WordEmbeddingTable embeddings,
                                 StopWords stop_words, std::size_t max_vocab);

}  // namespace fang
