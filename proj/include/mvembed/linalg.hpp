#pragma once

#include "mvembed/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <vector>

namespace mvembed {

// Samples are columns throughout: X is D x N.

inline Matrix center_data(const Matrix& x) {
  require(x.cols() >= 1 && x.rows() >= 1, "center_data: matrix must be non-empty");
  require_finite(x, "center_data");
  return x.colwise() - Vector(x.rowwise().mean());
}

// (1/N) * centered(Xi) * centered(Xj)^T
inline Matrix covariance_block(const Matrix& xi, const Matrix& xj) {
  require(xi.cols() == xj.cols(), "covariance_block: sample counts differ");
  require(xi.cols() >= 2, "covariance_block: need at least two samples");
  const Matrix ci = center_data(xi), cj = center_data(xj);
  return ci * cj.transpose() / double(xi.cols());
}

struct EigenSolution {
  Matrix vectors;                   // n x d, one stacked eigenvector per column
  Vector values;                    // length d, non-increasing
  std::vector<Index> view_offsets;  // block starts plus total row count
  double rho = 0.0;                 // sum of values
};

namespace detail {

inline void check_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidInput(std::string("solve_gep: ") + name + " is not symmetric");
}

// Largest-magnitude entry made positive; the first such entry decides.
inline void fix_sign(Eigen::Ref<Vector> w) {
  Index best = 0;
  double mag = std::abs(w(0));
  for (Index i = 1; i < w.size(); ++i) {
    if (std::abs(w(i)) > mag) {
      mag = std::abs(w(i));
      best = i;
    }
  }
  if (w(best) < 0.0) w = -w;
}

inline bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

}  // namespace detail

/// Solves P w = lambda Q w for the top-d algebraically largest eigenvalues.
///
/// Q is shifted to Q + delta * (trace(Q)/n) * I, factored by Cholesky, and the
/// problem is reduced to an ordinary symmetric eigenproblem (Q^-1 P is never
/// formed). Eigenvectors are normalized to w^T Q~ w = 1 with the
/// largest-magnitude entry positive; equal eigenvalues order their vectors
/// lexicographically.
inline EigenSolution solve_gep(const Matrix& p, const Matrix& q, Index d, double delta = 1e-6) {
  const Index n = p.rows();
  require(n >= 1 && p.cols() == n, "solve_gep: P must be square");
  require(q.rows() == n && q.cols() == n, "solve_gep: Q must match P");
  require(d >= 1 && d <= n, "solve_gep: d out of range");
  require(delta >= 0.0, "solve_gep: delta must be non-negative");
  require_finite(p, "solve_gep: P");
  require_finite(q, "solve_gep: Q");
  detail::check_symmetric(p, "P");
  detail::check_symmetric(q, "Q");

  Matrix qt = 0.5 * (q + q.transpose());
  qt.diagonal().array() += delta * qt.trace() / double(n);
  const Matrix ps = 0.5 * (p + p.transpose());

  Eigen::LLT<Matrix> llt(qt);
  if (llt.info() != Eigen::Success)
    throw SingularMetric("solve_gep: metric is not positive definite; increase delta");

  // C = L^-1 P L^-T, kept symmetric against roundoff.
  Matrix c = llt.matrixL().solve(ps);
  const Matrix ct = c.transpose();
  c = llt.matrixL().solve(ct);
  c = 0.5 * (c + c.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  if (es.info() != Eigen::Success) throw SingularMetric("solve_gep: eigendecomposition failed");

  EigenSolution sol;
  sol.vectors.resize(n, d);
  sol.values.resize(d);
  std::vector<Vector> ws(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) {
    const Index src = n - 1 - i;  // ascending order from the solver
    Vector w = llt.matrixU().solve(Vector(es.eigenvectors().col(src)));
    detail::fix_sign(w);
    ws[std::size_t(i)] = std::move(w);
    sol.values(i) = es.eigenvalues()(src);
  }

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (sol.values(a) != sol.values(b)) return sol.values(a) > sol.values(b);
    return detail::lex_less(ws[std::size_t(a)], ws[std::size_t(b)]);
  });
  Vector sorted(d);
  for (Index i = 0; i < d; ++i) {
    sorted(i) = sol.values(order[std::size_t(i)]);
    sol.vectors.col(i) = ws[std::size_t(order[std::size_t(i)])];
  }
  sol.values = sorted;
  sol.view_offsets = {0, n};
  sol.rho = sol.values.sum();
  return sol;
}

struct PcaModel {
  Vector mean;
  Matrix basis;      // D x k, orthonormal columns
  Vector explained;  // k covariance eigenvalues, non-increasing
};

inline PcaModel pca_fit(const Matrix& x, Index k) {
  require(x.cols() >= 2, "pca_fit: need at least two samples");
  require(k >= 1 && k <= x.rows(), "pca_fit: k out of range");
  PcaModel m;
  m.mean = x.rowwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(covariance_block(x, x));
  if (es.info() != Eigen::Success) throw SingularMetric("pca_fit: eigendecomposition failed");
  m.basis.resize(x.rows(), k);
  m.explained.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Index src = x.rows() - 1 - i;
    Vector b = es.eigenvectors().col(src);
    detail::fix_sign(b);
    m.basis.col(i) = b;
    m.explained(i) = std::max(0.0, es.eigenvalues()(src));
  }
  return m;
}

inline Matrix pca_transform(const PcaModel& m, const Matrix& x) {
  require(x.rows() == m.mean.size(), "pca_transform: dimension mismatch");
  return m.basis.transpose() * (x.colwise() - m.mean);
}

inline Matrix pca_reconstruct(const PcaModel& m, const Matrix& y) {
  require(y.rows() == m.basis.cols(), "pca_reconstruct: dimension mismatch");
  return (m.basis * y).colwise() + m.mean;
}

}  // namespace mvembed
