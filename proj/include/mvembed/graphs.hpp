#pragma once

#include "mvembed/core.hpp"

#include <vector>

namespace mvembed {

// Labels are 1-based and contiguous: every class 1..C is non-empty.
struct ClassIndicators {
  std::vector<int> labels;
  std::vector<Index> counts;  // per class
  Matrix indicators;          // N x C, one 0/1 column per class

  Index n() const { return Index(labels.size()); }
  int num_classes() const { return int(counts.size()); }
};

inline ClassIndicators class_indicators(const std::vector<int>& labels) {
  require(!labels.empty(), "class_indicators: labels are empty");
  int cmax = 0;
  for (int v : labels) {
    require(v >= 1, "class_indicators: labels must be 1-based");
    cmax = std::max(cmax, v);
  }
  ClassIndicators out;
  out.labels = labels;
  out.counts.assign(std::size_t(cmax), 0);
  out.indicators = Matrix::Zero(Index(labels.size()), cmax);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.counts[std::size_t(labels[i] - 1)] += 1;
    out.indicators(Index(i), labels[i] - 1) = 1.0;
  }
  for (std::size_t c = 0; c < out.counts.size(); ++c)
    require(out.counts[c] >= 1, "class_indicators: class " + std::to_string(c + 1) + " has no members");
  return out;
}

// I - (1/N) * ones
inline Matrix laplacian_total(Index n) {
  require(n >= 1, "laplacian_total: empty");
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / double(n));
}

// I - sum_c (1/N_c) e_c e_c^T
inline Matrix laplacian_within(const ClassIndicators& c) {
  Vector inv(c.num_classes());
  for (int k = 0; k < c.num_classes(); ++k) inv(k) = 1.0 / double(c.counts[std::size_t(k)]);
  return Matrix::Identity(c.n(), c.n()) - c.indicators * inv.asDiagonal() * c.indicators.transpose();
}

enum class BlockKind { Diagonal, OffDiagonal };

// Between-class graph whose diagonal and off-diagonal view blocks differ.
// Closed forms of the ordered pair sums over p != q:
//   diag:  2 * [((C-1)V + 1) * E diag(1/N_c^2) E^T - u u^T]
//   off:  -2 * [u u^T - E diag(1/N_c^2) E^T]
// with u = sum_c e_c / N_c.
inline Matrix laplacian_between_standard(const ClassIndicators& c, int num_views, BlockKind kind) {
  require(num_views >= 1, "laplacian_between_standard: need at least one view");
  require(c.num_classes() >= 2, "laplacian_between_standard: need at least two classes");
  const int cc = c.num_classes();
  Vector inv(cc), inv2(cc);
  for (int k = 0; k < cc; ++k) {
    inv(k) = 1.0 / double(c.counts[std::size_t(k)]);
    inv2(k) = inv(k) * inv(k);
  }
  const Matrix d2 = c.indicators * inv2.asDiagonal() * c.indicators.transpose();
  const Vector u = c.indicators * inv;
  if (kind == BlockKind::Diagonal)
    return 2.0 * ((double(cc - 1) * double(num_views) + 1.0) * d2 - u * u.transpose());
  return -2.0 * (u * u.transpose() - d2);
}

// 2 * sum over all class pairs of [(1/N_p^2) e_p e_p^T - (1/(N_p N_q)) e_p e_q^T];
// the p == q summands cancel but stay in the sum.
inline Matrix laplacian_between_modular(const ClassIndicators& c) {
  require(c.num_classes() >= 2, "laplacian_between_modular: need at least two classes");
  const int cc = c.num_classes();
  Vector inv(cc), inv2(cc);
  for (int k = 0; k < cc; ++k) {
    inv(k) = 1.0 / double(c.counts[std::size_t(k)]);
    inv2(k) = inv(k) * inv(k);
  }
  const Matrix d2 = c.indicators * inv2.asDiagonal() * c.indicators.transpose();
  const Vector u = c.indicators * inv;
  return 2.0 * (double(cc) * d2 - u * u.transpose());
}

enum class MvdaPart { Between, Within };

// Between: sum_c e_c e_c^T / N_c - ones/N.  Within: I - sum_c e_c e_c^T / N_c.
inline Matrix laplacian_mvda(const ClassIndicators& c, MvdaPart part) {
  Vector inv(c.num_classes());
  for (int k = 0; k < c.num_classes(); ++k) inv(k) = 1.0 / double(c.counts[std::size_t(k)]);
  const Matrix cls = c.indicators * inv.asDiagonal() * c.indicators.transpose();
  if (part == MvdaPart::Between)
    return cls - Matrix::Constant(c.n(), c.n(), 1.0 / double(c.n()));
  return Matrix::Identity(c.n(), c.n()) - cls;
}

struct WeightGraph {
  Matrix s;        // symmetric, non-negative weights
  Vector degrees;  // row sums
};

inline WeightGraph make_weight_graph(const Matrix& s) {
  require(s.rows() == s.cols() && s.rows() >= 1, "weight graph: S must be square");
  require_finite(s, "weight graph");
  require(s.minCoeff() >= 0.0, "weight graph: weights must be non-negative");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          "weight graph: S must be symmetric");
  return WeightGraph{s, s.rowwise().sum()};
}

inline Matrix laplacian_from_weights(const WeightGraph& g) {
  Matrix l = -g.s;
  l.diagonal() += g.degrees;
  return l;
}

}  // namespace mvembed
