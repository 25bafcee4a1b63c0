#pragma once

// Reference implementations used only by tests. Everything here is written
// the slow, literal way (explicit loops, direct definitions) so test
// expectations are produced by code that shares nothing with the library.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;

inline MatrixXd center_loop(const MatrixXd& x) {
  MatrixXd out = x;
  for (Index r = 0; r < x.rows(); ++r) {
    double m = 0;
    for (Index c = 0; c < x.cols(); ++c) m += x(r, c);
    m /= double(x.cols());
    for (Index c = 0; c < x.cols(); ++c) out(r, c) -= m;
  }
  return out;
}

// (1/N) * sum_n (a_n - mean_a)(b_n - mean_b)^T via explicit accumulation.
inline MatrixXd covariance_loop(const MatrixXd& a, const MatrixXd& b) {
  const MatrixXd ac = center_loop(a), bc = center_loop(b);
  MatrixXd out = MatrixXd::Zero(a.rows(), b.rows());
  for (Index n = 0; n < a.cols(); ++n)
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.rows(); ++j) out(i, j) += ac(i, n) * bc(j, n);
  return out / double(a.cols());
}

inline MatrixXd inv_sqrt_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  VectorXd d = es.eigenvalues();
  for (Index i = 0; i < d.size(); ++i) d(i) = 1.0 / std::sqrt(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Two-view canonical correlations via whitened cross-covariance SVD.
inline std::vector<double> classical_cca(const MatrixXd& x1, const MatrixXd& x2, int d) {
  const MatrixXd s11 = covariance_loop(x1, x1);
  const MatrixXd s22 = covariance_loop(x2, x2);
  const MatrixXd s12 = covariance_loop(x1, x2);
  const MatrixXd t = inv_sqrt_psd(s11) * s12 * inv_sqrt_psd(s22);
  Eigen::JacobiSVD<MatrixXd> svd(t);
  std::vector<double> out;
  for (int i = 0; i < d && i < svd.singularValues().size(); ++i)
    out.push_back(svd.singularValues()(i));
  return out;
}

// Class indicator column for class c (1-based) as a dense vector.
inline VectorXd indicator(const std::vector<int>& labels, int c) {
  VectorXd e = VectorXd::Zero(Index(labels.size()));
  for (std::size_t n = 0; n < labels.size(); ++n)
    if (labels[n] == c) e(Index(n)) = 1.0;
  return e;
}

inline int max_label(const std::vector<int>& labels) {
  int c = 0;
  for (int v : labels) c = std::max(c, v);
  return c;
}

inline double count_of(const std::vector<int>& labels, int c) {
  double n = 0;
  for (int v : labels) n += (v == c) ? 1.0 : 0.0;
  return n;
}

inline MatrixXd total_laplacian_loop(Index n) {
  MatrixXd l = MatrixXd::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) l(i, j) -= 1.0 / double(n);
  return l;
}

inline MatrixXd within_laplacian_loop(const std::vector<int>& labels) {
  const Index n = Index(labels.size());
  MatrixXd l = MatrixXd::Identity(n, n);
  const int cmax = max_label(labels);
  for (int c = 1; c <= cmax; ++c) {
    const VectorXd e = indicator(labels, c);
    l -= e * e.transpose() / count_of(labels, c);
  }
  return l;
}

// Literal sum over ordered class pairs p != q of the printed outer products.
inline MatrixXd between_standard_loop(const std::vector<int>& labels, int num_views, bool diagonal) {
  const Index n = Index(labels.size());
  const int cmax = max_label(labels);
  MatrixXd l = MatrixXd::Zero(n, n);
  for (int p = 1; p <= cmax; ++p) {
    for (int q = 1; q <= cmax; ++q) {
      if (p == q) continue;
      const VectorXd ep = indicator(labels, p), eq = indicator(labels, q);
      const double np = count_of(labels, p), nq = count_of(labels, q);
      if (diagonal)
        l += 2.0 * (double(num_views) / (np * np) * ep * ep.transpose() -
                    ep * eq.transpose() / (np * nq));
      else
        l += -2.0 * ep * eq.transpose() / (np * nq);
    }
  }
  return l;
}

// Sum over all ordered class pairs (the p == q summand vanishes).
inline MatrixXd between_modular_loop(const std::vector<int>& labels) {
  const Index n = Index(labels.size());
  const int cmax = max_label(labels);
  MatrixXd l = MatrixXd::Zero(n, n);
  for (int p = 1; p <= cmax; ++p) {
    for (int q = 1; q <= cmax; ++q) {
      const VectorXd ep = indicator(labels, p), eq = indicator(labels, q);
      const double np = count_of(labels, p), nq = count_of(labels, q);
      l += 2.0 * (ep * ep.transpose() / (np * np) - ep * eq.transpose() / (np * nq));
    }
  }
  return l;
}

inline MatrixXd mvda_between_loop(const std::vector<int>& labels) {
  const Index n = Index(labels.size());
  const int cmax = max_label(labels);
  MatrixXd l = MatrixXd::Zero(n, n);
  for (int c = 1; c <= cmax; ++c) {
    const VectorXd e = indicator(labels, c);
    l += e * e.transpose() / count_of(labels, c);
  }
  l -= MatrixXd::Ones(n, n) / double(n);
  return l;
}

inline MatrixXd mvda_within_loop(const std::vector<int>& labels) {
  return within_laplacian_loop(labels);
}

inline MatrixXd rbf_gram_loop(const MatrixXd& a, const MatrixXd& b, double sigma) {
  MatrixXd k(a.cols(), b.cols());
  for (Index i = 0; i < a.cols(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      double d2 = 0;
      for (Index r = 0; r < a.rows(); ++r) {
        const double diff = a(r, i) - b(r, j);
        d2 += diff * diff;
      }
      k(i, j) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  return k;
}

inline double mean_pairwise_distance_loop(const MatrixXd& x) {
  double total = 0;
  long long pairs = 0;
  for (Index i = 0; i < x.cols(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) {
      total += (x.col(i) - x.col(j)).norm();
      ++pairs;
    }
  return total / double(pairs);
}

// Double centering of a square Gram matrix, elementwise from the definition.
inline MatrixXd center_gram_loop(const MatrixXd& k) {
  const Index n = k.rows();
  MatrixXd out(n, n);
  double grand = 0;
  VectorXd rowm = VectorXd::Zero(n), colm = VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      rowm(i) += k(i, j) / double(n);
      colm(j) += k(i, j) / double(n);
      grand += k(i, j) / double(n * n);
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = k(i, j) - rowm(i) - colm(j) + grand;
  return out;
}

inline double average_precision_loop(const std::vector<int>& rel) {
  double hits = 0, sum = 0, total = 0;
  for (int r : rel) total += r;
  for (std::size_t k = 0; k < rel.size(); ++k) {
    if (rel[k]) {
      hits += 1;
      sum += hits / double(k + 1);
    }
  }
  return sum / total;
}

// Central finite difference of a scalar function of one matrix entry.
template <class F>
double central_diff(F&& f, MatrixXd& h, Index r, Index c, double eps) {
  const double keep = h(r, c);
  h(r, c) = keep + eps;
  const double fp = f();
  h(r, c) = keep - eps;
  const double fm = f();
  h(r, c) = keep;
  return (fp - fm) / (2.0 * eps);
}

}  // namespace oracle
