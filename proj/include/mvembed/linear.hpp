#pragma once

#include "mvembed/dataset.hpp"
#include "mvembed/graphs.hpp"
#include "mvembed/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mvembed {

enum class Method { MvCCA, MvPLS, SLMvDA, MvMDA, MvDA };

inline bool method_supervised(Method m) {
  return m == Method::SLMvDA || m == Method::MvMDA || m == Method::MvDA;
}

inline const char* method_name(Method m) {
  switch (m) {
    case Method::MvCCA: return "mvcca";
    case Method::MvPLS: return "mvpls";
    case Method::SLMvDA: return "slmvda";
    case Method::MvMDA: return "mvmda";
    case Method::MvDA: return "mvda";
  }
  return "mvcca";
}

inline std::optional<Method> method_from_name(const std::string& name) {
  if (name == "mvcca") return Method::MvCCA;
  if (name == "mvpls") return Method::MvPLS;
  if (name == "slmvda") return Method::SLMvDA;
  if (name == "mvmda") return Method::MvMDA;
  if (name == "mvda") return Method::MvDA;
  return std::nullopt;
}

struct MethodSpec {
  Method method = Method::MvCCA;
  int d = 50;
  double delta = 1e-6;
  std::optional<int> pca_dims;  // unset: off; 0: keep min(D_v, N-1); k: cap at k
};

struct GraphPair {
  Matrix p, q;
  std::vector<Index> offsets;  // block starts plus total size
};

// Stacks the per-view pairing (P) and metric (Q) blocks for one method.
// Views are used as given; callers wanting centered statistics center first.
//   MvCCA : P_ij = (1/N) X_i L X_j^T (i != j), Q block-diag of the i = i case
//   MvPLS : same P, identity Q
//   SLMvDA: between-class P with distinct diagonal/off-diagonal kernels,
//           block-diagonal within-class Q
//   MvMDA : one between-class kernel for every block, within-class Q
//   MvDA  : between/within scatter kernels on every block, dense Q
inline GraphPair assemble_blocks(const std::vector<Matrix>& views, const std::vector<int>& labels,
                                 Method method) {
  require(views.size() >= 2, "assemble_blocks: need at least two views");
  const Index n = views.front().cols();
  const int v = int(views.size());
  GraphPair gp;
  gp.offsets.assign(1, 0);
  for (const Matrix& x : views) {
    require(x.cols() == n, "assemble_blocks: sample counts differ");
    gp.offsets.push_back(gp.offsets.back() + x.rows());
  }
  const Index total = gp.offsets.back();
  gp.p = Matrix::Zero(total, total);
  gp.q = Matrix::Zero(total, total);

  Matrix pair_same, pair_cross, metric;  // sample-space kernels
  bool metric_dense = false, metric_identity = false;
  switch (method) {
    case Method::MvCCA:
    case Method::MvPLS: {
      const Matrix l = laplacian_total(n) / double(n);
      pair_same = Matrix::Zero(n, n);
      pair_cross = l;
      metric = l;
      metric_identity = method == Method::MvPLS;
      break;
    }
    case Method::SLMvDA: {
      require(!labels.empty(), "assemble_blocks: method requires labels");
      const auto c = class_indicators(labels);
      pair_same = laplacian_between_standard(c, v, BlockKind::Diagonal);
      pair_cross = laplacian_between_standard(c, v, BlockKind::OffDiagonal);
      metric = laplacian_within(c);
      break;
    }
    case Method::MvMDA: {
      require(!labels.empty(), "assemble_blocks: method requires labels");
      const auto c = class_indicators(labels);
      pair_same = laplacian_between_modular(c);
      pair_cross = pair_same;
      metric = laplacian_within(c);
      break;
    }
    case Method::MvDA: {
      require(!labels.empty(), "assemble_blocks: method requires labels");
      const auto c = class_indicators(labels);
      pair_same = laplacian_mvda(c, MvdaPart::Between);
      pair_cross = pair_same;
      metric = laplacian_mvda(c, MvdaPart::Within);
      metric_dense = true;
      break;
    }
  }
  if (!labels.empty() && method_supervised(method))
    require(Index(labels.size()) == n, "assemble_blocks: label count differs");

  for (int i = 0; i < v; ++i) {
    const auto ri = Eigen::seqN(gp.offsets[std::size_t(i)],
                                gp.offsets[std::size_t(i) + 1] - gp.offsets[std::size_t(i)]);
    for (int j = 0; j < v; ++j) {
      const auto rj = Eigen::seqN(gp.offsets[std::size_t(j)],
                                  gp.offsets[std::size_t(j) + 1] - gp.offsets[std::size_t(j)]);
      const Matrix& kernel = (i == j) ? pair_same : pair_cross;
      if (kernel.cwiseAbs().maxCoeff() > 0.0)
        gp.p(ri, rj) = views[std::size_t(i)] * kernel * views[std::size_t(j)].transpose();
      if (metric_dense)
        gp.q(ri, rj) = views[std::size_t(i)] * metric * views[std::size_t(j)].transpose();
    }
    if (!metric_dense && !metric_identity)
      gp.q(ri, ri) = views[std::size_t(i)] * metric * views[std::size_t(i)].transpose();
  }
  if (metric_identity) gp.q = Matrix::Identity(total, total);
  return gp;
}

struct LinearModel {
  MethodSpec spec;
  std::vector<std::string> view_names;
  std::vector<Index> input_dims;
  std::vector<Vector> means;                 // per-view centering
  std::vector<std::optional<PcaModel>> pca;  // per-view compression
  EigenSolution solution;                    // stacked over post-compression dims
};

namespace detail {

inline Matrix apply_preprocess(const Vector& mean, const std::optional<PcaModel>& pca,
                               const Matrix& x) {
  const Matrix centered = x.colwise() - mean;
  if (pca.has_value()) return pca->basis.transpose() * centered;
  return centered;
}

inline Matrix preprocess_view(const LinearModel& m, std::size_t v, const Matrix& x) {
  return apply_preprocess(m.means[v], m.pca[v], x);
}

}  // namespace detail

/// Fits one linear multi-view embedding: center (and optionally compress)
/// each view, assemble the method's block matrices, solve the generalized
/// eigenproblem for the top-d stacked directions.
inline LinearModel fit_linear(const Dataset& data, const MethodSpec& spec) {
  data.validate();
  require(data.num_samples() >= 2, "fit_linear: need at least two samples");
  if (method_supervised(spec.method))
    require(data.has_labels(), "fit_linear: method requires labels");

  LinearModel model;
  model.spec = spec;
  model.view_names = data.view_names;
  std::vector<Matrix> prepped;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const Matrix& x = data.views[v];
    model.input_dims.push_back(x.rows());
    model.means.push_back(x.rowwise().mean());
    if (spec.pca_dims.has_value()) {
      require(*spec.pca_dims >= 0, "fit_linear: pca_dims must be non-negative");
      Index k = std::min(x.rows(), data.num_samples() - 1);
      if (*spec.pca_dims > 0) k = std::min(k, Index(*spec.pca_dims));
      model.pca.emplace_back(pca_fit(x, k));
    } else {
      model.pca.emplace_back(std::nullopt);
    }
    prepped.push_back(detail::preprocess_view(model, v, x));
  }

  Index total = 0;
  for (const Matrix& z : prepped) total += z.rows();
  require(spec.d >= 1 && Index(spec.d) <= total, "fit_linear: d out of range");

  auto gp = assemble_blocks(prepped, data.labels, spec.method);
  model.solution = solve_gep(gp.p, gp.q, spec.d, spec.delta);
  model.solution.view_offsets = gp.offsets;
  return model;
}

inline Matrix view_block(const EigenSolution& sol, std::size_t v) {
  const Index lo = sol.view_offsets[v];
  return sol.vectors.middleRows(lo, sol.view_offsets[v + 1] - lo);
}

/// Projects each view into the shared space: Y_v = W_v^T applied to the
/// training-time preprocessing of X_v.
inline std::vector<Matrix> project(const LinearModel& m, const std::vector<Matrix>& views) {
  require(views.size() == m.means.size(), "project: view count mismatch");
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    require(views[v].rows() == m.input_dims[v],
            "project: view " + std::to_string(v) + " dimension mismatch");
    require(views[v].cols() >= 1, "project: empty view");
    require_finite(views[v], "project view " + std::to_string(v));
    out.push_back(view_block(m.solution, v).transpose() * detail::preprocess_view(m, v, views[v]));
  }
  return out;
}

/// Trace-ratio objective of the model's directions on the supplied data,
/// scaled by d so the training value equals the eigenvalue sum.
inline double objective_value(const LinearModel& m, const Dataset& data) {
  data.validate();
  if (method_supervised(m.spec.method))
    require(data.has_labels(), "objective_value: method requires labels");
  require(data.views.size() == m.means.size(), "objective_value: view count mismatch");
  std::vector<Matrix> prepped;
  for (std::size_t v = 0; v < data.views.size(); ++v)
    prepped.push_back(detail::preprocess_view(m, v, data.views[v]));
  auto gp = assemble_blocks(prepped, data.labels, m.spec.method);
  const Index n = gp.q.rows();
  gp.q.diagonal().array() += m.spec.delta * gp.q.trace() / double(n);
  const Matrix& w = m.solution.vectors;
  const double num = (w.transpose() * gp.p * w).trace();
  const double den = (w.transpose() * gp.q * w).trace();
  require(den > 0.0, "objective_value: degenerate metric");
  return double(w.cols()) * num / den;
}

}  // namespace mvembed
