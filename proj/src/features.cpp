#include "fang/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fang {

namespace {

constexpr const char* kStopWords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "rt", "s", "same",
    "she", "should", "so", "some", "such", "t", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
};

bool is_url(std::string_view chunk) {
  std::string lower(chunk.substr(0, 8));
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.");
}

std::vector<std::string> content_tokens(std::string_view text, const StopWords& stop_words) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text))
    if (!stop_words.contains(t)) out.push_back(std::move(t));
  return out;
}

}  // namespace

const StopWords& default_stop_words() {
  static const StopWords words(std::begin(kStopWords), std::end(kStopWords));
  return words;
}

StopWords load_stop_words(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open stop-word list " + path.string());
  StopWords words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : tokenize(line)) words.insert(std::move(t));
  }
  return words;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string clean_post_text(std::string_view text, const StopWords& stop_words) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view chunk = text.substr(pos, end - pos);
    pos = end;
    if (chunk.empty() || is_url(chunk)) continue;
    for (const auto& t : content_tokens(chunk, stop_words)) {
      if (!out.empty()) out.push_back(' ');
      out += t;
    }
  }
  return out;
}

bool report_stance_rule(std::string_view post, std::string_view title, const StopWords& stop_words) {
  return clean_post_text(post, stop_words) == clean_post_text(title, stop_words);
}

double TfIdfModel::idf(std::size_t term) const {
  return std::log(static_cast<double>(num_documents) / static_cast<double>(document_frequency.at(term)));
}

Eigen::VectorXd TfIdfModel::transform(std::string_view text, const StopWords& stop_words) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  for (const auto& t : content_tokens(text, stop_words)) {
    auto it = index.find(t);
    if (it != index.end()) v[static_cast<Eigen::Index>(it->second)] += 1.0;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) v[i] *= idf(static_cast<std::size_t>(i));
  return v;
}

TfIdfModel fit_tfidf(std::span<const std::string> corpus, const StopWords& stop_words,
                     std::size_t max_vocab) {
  if (corpus.empty()) throw Error(ErrorCategory::InvalidArgument, "fit_tfidf: empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto tokens = content_tokens(doc, stop_words);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_vocab) ranked.resize(max_vocab);
  std::sort(ranked.begin(), ranked.end());

  TfIdfModel model;
  model.num_documents = corpus.size();
  for (auto& [term, freq] : ranked) {
    model.index.emplace(term, model.terms.size());
    model.terms.push_back(term);
    model.document_frequency.push_back(freq);
  }
  return model;
}

void WordEmbeddingTable::insert(const std::string& term, const Eigen::VectorXd& v) {
  if (vectors_.empty() && dim_ == 0) dim_ = v.size();
  if (v.size() != dim_)
    throw Error(ErrorCategory::DimensionMismatch,
                "embedding for '" + term + "' has dimension " + std::to_string(v.size()) +
                    ", expected " + std::to_string(dim_));
  vectors_[term] = v;
}

Eigen::VectorXd WordEmbeddingTable::lookup(const std::string& term) const {
  auto it = vectors_.find(term);
  if (it == vectors_.end()) return Eigen::VectorXd::Zero(dim_);
  return it->second;
}

WordEmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open embeddings " + path.string());
  WordEmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string term;
    if (!(fields >> term)) continue;
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCategory::MalformedLine,
                    path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'", line_no);
      }
    }
    if (values.empty())
      throw Error(ErrorCategory::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": no vector values", line_no);
    try {
      table.insert(term, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    } catch (const Error& e) {
      throw Error(ErrorCategory::MalformedLine, path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return table;
}

void save_embeddings(const WordEmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path.string());
  std::vector<std::string> terms;
  for (const auto& [t, v] : table.entries()) terms.push_back(t);
  std::sort(terms.begin(), terms.end());
  out.precision(17);
  for (const auto& t : terms) {
    out << t;
    for (double x : table.entries().at(t)) out << ' ' << x;
    out << '\n';
  }
}

Eigen::VectorXd entity_features(std::string_view text, const TfIdfModel& tfidf,
                                const WordEmbeddingTable& emb, const StopWords& stop_words) {
  const auto vocab = static_cast<Eigen::Index>(tfidf.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vocab + emb.dim());
  out.head(vocab) = tfidf.transform(text, stop_words);

  Eigen::VectorXd semantic = Eigen::VectorXd::Zero(emb.dim());
  double mass = 0.0;
  for (Eigen::Index i = 0; i < vocab; ++i) {
    const double w = out[i];
    if (w == 0.0) continue;
    mass += w;
    if (emb.dim() > 0) semantic += w * emb.lookup(tfidf.terms[static_cast<std::size_t>(i)]);
  }
  out.tail(emb.dim()) = semantic / std::max(1.0, mass);
  return out;
}

double default_time_scale() { return std::log(1.0 + 336.0); }

MetaVector engagement_meta(const Engagement& e, double time_scale, bool disable_time) {
  if (!(e.elapsed_hours >= 0.0))
    throw Error(ErrorCategory::NegativeElapsed, "engagement_meta: negative elapsed time");
  if (!(time_scale > 0.0)) throw Error(ErrorCategory::InvalidArgument, "time_scale must be positive");
  MetaVector m = MetaVector::Zero();
  m[0] = disable_time ? 0.0 : std::log1p(e.elapsed_hours) / time_scale;
  m[1 + static_cast<int>(e.stance)] = 1.0;
  return m;
}

std::string entity_text(const Node& n) {
  if (n.title.empty()) return n.text;
  return n.title + "\n" + n.text;
}

FeatureSpace build_feature_space(const SocialGraph& g, WordEmbeddingTable embeddings,
                                 StopWords stop_words, std::size_t max_vocab) {
  std::vector<std::string> corpus;
  corpus.reserve(g.num_nodes());
  for (const Node& n : g.nodes()) corpus.push_back(entity_text(n));

  FeatureSpace space;
  space.tfidf = fit_tfidf(corpus, stop_words, max_vocab);
  space.embeddings = std::move(embeddings);
  space.stop_words = std::move(stop_words);
  const auto dim = static_cast<Eigen::Index>(space.tfidf.size()) + space.embeddings.dim();
  space.features.resize(dim, static_cast<Eigen::Index>(g.num_nodes()));
  for (std::size_t i = 0; i < corpus.size(); ++i)
    space.features.col(static_cast<Eigen::Index>(i)) =
        entity_features(corpus[i], space.tfidf, space.embeddings, space.stop_words);
  return space;
}

}  // namespace fang
