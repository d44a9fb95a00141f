#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "fang/eigen_types.hpp"
#include "fang/error.hpp"
#include "fang/graph.hpp"
#include "fang/temporal.hpp"

namespace fang {

inline constexpr double kProbabilityClamp = 1e-7;

// Per-stance projections into the stance spaces: A_c for users, B_c for articles.
template <typename Scalar>
struct StanceProjections {
  std::array<Matrix<Scalar>, kNumStances> user;     // A_c: d_c x d
  std::array<Matrix<Scalar>, kNumStances> article;  // B_c: d_c x d
};

template <typename Scalar>
struct ClassifierParams {
  Vector<Scalar> weights;  // 2d, applied to concat(z_a, z_s)
  Vector<Scalar> bias;     // size 1
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return detail::logistic(x);
}

// -log(clamp(sigmoid(x))) and its derivative; the derivative is zero where
// the clamp is active.
template <typename Scalar>
Scalar neg_log_sigmoid(Scalar x, Scalar* d_x = nullptr) {
  const Scalar lo = Scalar(kProbabilityClamp), hi = Scalar(1 - kProbabilityClamp);
  const Scalar s = sigmoid(x);
  if (s < lo || s > hi) {
    if (d_x) *d_x = Scalar(0);
    return -std::log(std::clamp(s, lo, hi));
  }
  if (d_x) *d_x = s - Scalar(1);
  // log1p form keeps precision for large positive x.
  return x >= Scalar(0) ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

struct ProximityAnchor {
  Index anchor = 0;
  std::vector<Index> positives;
  std::vector<Index> negatives;
};

// Negative-sampling proximity loss averaged over anchors:
//   -sum_p log s(z_r.z_p) - Q sum_n log s(-z_r.z_n).
// `literal_sign` flips the sign of the negative term, which rewards
// similarity to negatives.
template <typename Scalar>
Scalar proximity_loss(const Matrix<Scalar>& z, std::span<const ProximityAnchor> anchors, Scalar q,
                      bool literal_sign = false, Matrix<Scalar>* d_z = nullptr) {
  if (anchors.empty()) return Scalar(0);
  const Scalar scale = Scalar(1) / static_cast<Scalar>(anchors.size());
  const Scalar neg_sign = literal_sign ? Scalar(-1) : Scalar(1);
  Scalar total = 0;
  for (const auto& a : anchors) {
    const auto zr = z.col(a.anchor);
    for (Index p : a.positives) {
      Scalar g;
      total += neg_log_sigmoid(zr.dot(z.col(p)), &g);
      if (d_z) {
        d_z->col(a.anchor) += scale * g * z.col(p);
        d_z->col(p) += scale * g * zr;
      }
    }
    for (Index n : a.negatives) {
      Scalar g;
      total += neg_sign * q * neg_log_sigmoid(-zr.dot(z.col(n)), &g);
      if (d_z) {
        const Scalar c = -neg_sign * q * scale * g;
        d_z->col(a.anchor) += c * z.col(n);
        d_z->col(n) += c * zr;
      }
    }
  }
  return total * scale;
}

template <typename Scalar>
Eigen::Matrix<Scalar, kNumStances, 1> stance_logits(const Vector<Scalar>& z_user, const Vector<Scalar>& z_article,
                                                    const StanceProjections<Scalar>& proj) {
  Eigen::Matrix<Scalar, kNumStances, 1> s;
  for (int c = 0; c < kNumStances; ++c) s[c] = (proj.user[c] * z_user).dot(proj.article[c] * z_article);
  return s;
}

struct StancePair {
  Index user = 0;     // column in the user embedding table
  Index article = 0;  // column in the article embedding table
  Stance observed = Stance::Report;
};

template <typename Scalar>
struct StanceGrads {
  StanceProjections<Scalar>* proj = nullptr;
  Matrix<Scalar>* d_users = nullptr;
  Matrix<Scalar>* d_articles = nullptr;
};

// Mean over pairs of the cross-entropy of softmax over the four stances.
template <typename Scalar>
Scalar stance_loss(const Matrix<Scalar>& z_users, const Matrix<Scalar>& z_articles,
                   const StanceProjections<Scalar>& proj, std::span<const StancePair> pairs,
                   StanceGrads<Scalar> grads = {}) {
  if (pairs.empty()) return Scalar(0);
  const Scalar scale = Scalar(1) / static_cast<Scalar>(pairs.size());
  const bool want_grads = grads.proj || grads.d_users || grads.d_articles;
  std::array<Matrix<Scalar>, kNumStances> au, bz, gu, ga;
  for (int c = 0; c < kNumStances; ++c) {
    au[c] = proj.user[c] * z_users;
    bz[c] = proj.article[c] * z_articles;
    if (want_grads) {
      gu[c] = Matrix<Scalar>::Zero(au[c].rows(), au[c].cols());
      ga[c] = Matrix<Scalar>::Zero(bz[c].rows(), bz[c].cols());
    }
  }
  Scalar total = 0;
  for (const auto& pair : pairs) {
    Eigen::Matrix<Scalar, kNumStances, 1> s;
    for (int c = 0; c < kNumStances; ++c) s[c] = au[c].col(pair.user).dot(bz[c].col(pair.article));
    const Scalar m = s.maxCoeff();
    const Scalar lse = m + std::log((s.array() - m).exp().sum());
    const int obs = static_cast<int>(pair.observed);
    total += lse - s[obs];
    if (!want_grads) continue;
    for (int c = 0; c < kNumStances; ++c) {
      const Scalar ds = scale * (std::exp(s[c] - lse) - (c == obs ? Scalar(1) : Scalar(0)));
      gu[c].col(pair.user) += ds * bz[c].col(pair.article);
      ga[c].col(pair.article) += ds * au[c].col(pair.user);
    }
  }
  if (want_grads)
    for (int c = 0; c < kNumStances; ++c) {
      if (grads.proj) {
        grads.proj->user[c].noalias() += gu[c] * z_users.transpose();
        grads.proj->article[c].noalias() += ga[c] * z_articles.transpose();
      }
      if (grads.d_users) grads.d_users->noalias() += proj.user[c].transpose() * gu[c];
      if (grads.d_articles) grads.d_articles->noalias() += proj.article[c].transpose() * ga[c];
    }
  return total * scale;
}

template <typename Scalar>
Scalar classifier_logit(const Vector<Scalar>& z_article, const Vector<Scalar>& z_source,
                        const ClassifierParams<Scalar>& clf) {
  const Index d = z_article.size();
  if (clf.weights.size() != 2 * d || z_source.size() != d)
    throw Error(ErrorCategory::DimensionMismatch, "classifier expects concat(z_a, z_s) of width 2d");
  return clf.weights.head(d).dot(z_article) + clf.weights.tail(d).dot(z_source) + clf.bias[0];
}

// Probability that the article is real (label 1); fake iff below 0.5.
template <typename Scalar>
Scalar predict_article(const Vector<Scalar>& z_article, const Vector<Scalar>& z_source,
                       const ClassifierParams<Scalar>& clf) {
  return sigmoid(classifier_logit(z_article, z_source, clf));
}

inline bool is_fake(double probability_real) { return probability_real < 0.5; }

// -(1/T) sum [y log p + (1-y) log(1-p)] with p clamped; y = 1 for real.
template <typename Scalar>
Scalar fake_news_loss(std::span<const Scalar> probabilities, std::span<const int> labels) {
  if (probabilities.empty()) throw Error(ErrorCategory::InvalidArgument, "fake_news_loss: empty batch");
  if (probabilities.size() != labels.size())
    throw Error(ErrorCategory::DimensionMismatch, "fake_news_loss: labels and scores differ in length");
  const Scalar lo = Scalar(kProbabilityClamp), hi = Scalar(1 - kProbabilityClamp);
  Scalar total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Scalar p = std::clamp(probabilities[i], lo, hi);
    total -= labels[i] ? std::log(p) : std::log(Scalar(1) - p);
  }
  return total / static_cast<Scalar>(labels.size());
}

// Same loss evaluated from logits, with d loss / d logit.
template <typename Scalar>
Scalar fake_news_loss_from_logits(std::span<const Scalar> logits, std::span<const int> labels,
                                  std::vector<Scalar>* d_logits = nullptr) {
  if (logits.empty()) throw Error(ErrorCategory::InvalidArgument, "fake_news_loss: empty batch");
  const Scalar scale = Scalar(1) / static_cast<Scalar>(logits.size());
  if (d_logits) d_logits->assign(logits.size(), Scalar(0));
  Scalar total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Scalar g;
    // -log(1 - s(x)) = -log s(-x)
    if (labels[i]) {
      total += neg_log_sigmoid(logits[i], &g);
    } else {
      total += neg_log_sigmoid(-logits[i], &g);
      g = -g;
    }
    if (d_logits) (*d_logits)[i] = scale * g;
  }
  return total * scale;
}

struct LossFlags {
  bool disable_stance_loss = false;
  bool disable_proximity_loss = false;
};

inline double total_loss(double prox, double stance, double news, LossFlags flags = {}) {
  if (!std::isfinite(prox) || !std::isfinite(stance) || !std::isfinite(news))
    throw Error(ErrorCategory::NonFinite, "non-finite loss component");
  return (flags.disable_proximity_loss ? 0.0 : prox) + (flags.disable_stance_loss ? 0.0 : stance) + news;
}

}  // namespace fang
