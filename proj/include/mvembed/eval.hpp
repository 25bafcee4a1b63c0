#pragma once

#include "mvembed/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace mvembed {

// Multinomial logistic regression over latent features. The weight matrix is
// (d + 1) x C with the bias in the last row; the bias is not penalized.
struct Matcher {
  Matrix weights;
  int classes = 0;
  int iters = 0;
  double lr = 0.0;
};

namespace detail {

inline Matrix with_bias_row(const Matrix& x) {
  Matrix out(x.rows() + 1, x.cols());
  out.topRows(x.rows()) = x;
  out.row(x.rows()).setOnes();
  return out;
}

inline Matrix softmax_columns(const Matrix& logits) {
  Matrix p = logits;
  for (Index j = 0; j < p.cols(); ++j) {
    p.col(j).array() -= p.col(j).maxCoeff();
    p.col(j) = p.col(j).array().exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

}  // namespace detail

inline Matrix class_probabilities(const Matcher& m, const Matrix& latent) {
  require(latent.rows() + 1 == m.weights.rows(), "class_probabilities: dimension mismatch");
  require(latent.cols() >= 1, "class_probabilities: empty input");
  require_finite(latent, "class_probabilities input");
  return detail::softmax_columns(m.weights.transpose() * detail::with_bias_row(latent));
}

/// Full-batch gradient descent on L2-penalized cross-entropy from zero
/// weights. The loss is non-increasing at the default learning rate.
inline Matcher fit_matcher(const Matrix& latent, const std::vector<int>& labels, int iters = 500,
                           double lr = 0.1, double l2 = 1e-4) {
  require(latent.cols() == Index(labels.size()), "fit_matcher: label count mismatch");
  require(latent.rows() >= 1, "fit_matcher: empty features");
  require(iters >= 0 && lr > 0.0 && l2 >= 0.0, "fit_matcher: bad training parameters");
  require_finite(latent, "fit_matcher input");
  const auto ind = class_indicators(labels);
  const int classes = int(ind.indicators.cols());
  require(classes >= 2, "fit_matcher: need at least two classes");
  require(latent.cols() >= classes, "fit_matcher: need at least one sample per class");

  const Index n = latent.cols();
  const Matrix x = detail::with_bias_row(latent);
  const Matrix onehot = ind.indicators.transpose();  // C x N

  Matcher m;
  m.classes = classes;
  m.iters = iters;
  m.lr = lr;
  m.weights = Matrix::Zero(x.rows(), classes);
  for (int it = 0; it < iters; ++it) {
    const Matrix p = detail::softmax_columns(m.weights.transpose() * x);
    Matrix grad = x * (p - onehot).transpose() / double(n);
    grad.topRows(x.rows() - 1) += l2 * m.weights.topRows(x.rows() - 1);
    m.weights -= lr * grad;
  }
  return m;
}

/// Penalized cross-entropy of the matcher on the given data; the quantity
/// fit_matcher descends.
inline double matcher_loss(const Matcher& m, const Matrix& latent, const std::vector<int>& labels) {
  require(latent.cols() == Index(labels.size()), "matcher_loss: label count mismatch");
  const Matrix p = class_probabilities(m, latent);
  double loss = 0.0;
  for (Index j = 0; j < latent.cols(); ++j)
    loss -= std::log(std::max(p(labels[std::size_t(j)] - 1, j), 1e-300));
  loss /= double(latent.cols());
  loss += 0.5 * 1e-4 * m.weights.topRows(m.weights.rows() - 1).squaredNorm();
  return loss;
}

enum class ScoreKind { Cosine, Dot };

/// Pairwise similarity of probability columns: out(q, g) compares query
/// column q with gallery column g.
inline Matrix score_matrix(const Matrix& query_prob, const Matrix& gallery_prob, ScoreKind kind) {
  require(query_prob.rows() == gallery_prob.rows(), "score_matrix: dimension mismatch");
  if (kind == ScoreKind::Dot) return query_prob.transpose() * gallery_prob;
  Matrix qn = query_prob, gn = gallery_prob;
  for (Index j = 0; j < qn.cols(); ++j) {
    const double norm = qn.col(j).norm();
    require(norm > 0.0, "score_matrix: zero query vector");
    qn.col(j) /= norm;
  }
  for (Index j = 0; j < gn.cols(); ++j) {
    const double norm = gn.col(j).norm();
    require(norm > 0.0, "score_matrix: zero gallery vector");
    gn.col(j) /= norm;
  }
  return qn.transpose() * gn;
}

inline Matrix match_scores(const Matcher& m, const Matrix& query_latent,
                           const Matrix& gallery_latent, ScoreKind kind = ScoreKind::Cosine) {
  return score_matrix(class_probabilities(m, query_latent),
                      class_probabilities(m, gallery_latent), kind);
}

/// Mean precision over the ranks holding relevant items.
inline double average_precision(const std::vector<int>& relevance) {
  int hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    require(relevance[k] == 0 || relevance[k] == 1, "average_precision: relevance must be 0/1");
    if (relevance[k] == 1) {
      ++hits;
      sum += double(hits) / double(k + 1);
    }
  }
  require(hits > 0, "average_precision: no relevant items");
  return sum / double(hits);
}

/// Interpolated precision at recall levels 0.0, 0.1, ..., 1.0: the best
/// precision achieved at or beyond each recall level.
inline std::vector<double> pr_curve_11pt(const std::vector<int>& relevance) {
  int total = 0;
  for (int r : relevance) {
    require(r == 0 || r == 1, "pr_curve_11pt: relevance must be 0/1");
    total += r;
  }
  require(total > 0, "pr_curve_11pt: no relevant items");
  std::vector<double> recall, precision;
  int hits = 0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (relevance[k] == 0) continue;
    ++hits;
    recall.push_back(double(hits) / double(total));
    precision.push_back(double(hits) / double(k + 1));
  }
  std::vector<double> out(11, 0.0);
  for (int level = 0; level <= 10; ++level) {
    const double r = double(level) / 10.0;
    double best = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i)
      if (recall[i] >= r - 1e-12) best = std::max(best, precision[i]);
    out[std::size_t(level)] = best;
  }
  return out;
}

struct RetrievalResult {
  std::vector<double> ap;        // one entry per query
  double map = 0.0;
  std::vector<double> precision;  // mean 11-point interpolated curve
  std::string query_tag, gallery_tag;
};

/// Ranks the full gallery for every query by matcher-probability similarity;
/// an item is relevant when its label equals the query's. Ties in score keep
/// gallery order.
inline RetrievalResult run_cross_modal(const Matcher& m, const Matrix& query_latent,
                                       const std::vector<int>& query_labels,
                                       const Matrix& gallery_latent,
                                       const std::vector<int>& gallery_labels,
                                       const std::string& query_tag,
                                       const std::string& gallery_tag,
                                       ScoreKind kind = ScoreKind::Cosine) {
  require(query_latent.cols() == Index(query_labels.size()),
          "run_cross_modal: query label count mismatch");
  require(gallery_latent.cols() == Index(gallery_labels.size()),
          "run_cross_modal: gallery label count mismatch");
  const Matrix scores = match_scores(m, query_latent, gallery_latent, kind);

  RetrievalResult res;
  res.query_tag = query_tag;
  res.gallery_tag = gallery_tag;
  res.precision.assign(11, 0.0);
  const Index gallery = scores.cols();
  std::vector<Index> order(static_cast<std::size_t>(gallery));
  for (Index q = 0; q < scores.rows(); ++q) {
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores(q, a) > scores(q, b); });
    std::vector<int> rel;
    rel.reserve(order.size());
    for (Index g : order)
      rel.push_back(gallery_labels[std::size_t(g)] == query_labels[std::size_t(q)] ? 1 : 0);
    res.ap.push_back(average_precision(rel));
    const auto curve = pr_curve_11pt(rel);
    for (std::size_t i = 0; i < 11; ++i) res.precision[i] += curve[i];
  }
  for (double& p : res.precision) p /= double(res.ap.size());
  res.map = std::accumulate(res.ap.begin(), res.ap.end(), 0.0) / double(res.ap.size());
  return res;
}

/// Classifies test columns by the nearest training class centroid; distance
/// ties resolve to the lower class index.
inline double nearest_class_mean_accuracy(const Matrix& train_latent,
                                          const std::vector<int>& train_labels,
                                          const Matrix& test_latent,
                                          const std::vector<int>& test_labels) {
  require(train_latent.cols() == Index(train_labels.size()),
          "nearest_class_mean_accuracy: train label count mismatch");
  require(test_latent.cols() == Index(test_labels.size()),
          "nearest_class_mean_accuracy: test label count mismatch");
  require(test_latent.cols() >= 1, "nearest_class_mean_accuracy: empty test set");
  require(train_latent.rows() == test_latent.rows(),
          "nearest_class_mean_accuracy: dimension mismatch");
  const auto ind = class_indicators(train_labels);
  const int classes = int(ind.indicators.cols());
  Matrix means(train_latent.rows(), classes);
  for (int c = 0; c < classes; ++c)
    means.col(c) = (train_latent * ind.indicators.col(c)) / double(ind.counts[std::size_t(c)]);

  int correct = 0;
  for (Index j = 0; j < test_latent.cols(); ++j) {
    int best = 0;
    double best_dist = (test_latent.col(j) - means.col(0)).squaredNorm();
    for (int c = 1; c < classes; ++c) {
      const double dist = (test_latent.col(j) - means.col(c)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    if (best + 1 == test_labels[std::size_t(j)]) ++correct;
  }
  return double(correct) / double(test_latent.cols());
}

}  // namespace mvembed
