#pragma once

#include "mvembed/linear.hpp"
#include "mvembed/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvembed {

enum class KernelKind { Linear, Rbf };

struct KernelFunction {
  KernelKind kind = KernelKind::Rbf;
  double sigma = 1.0;  // Rbf bandwidth; ignored for Linear
};

inline const char* kernel_name(KernelKind k) {
  return k == KernelKind::Rbf ? "rbf" : "linear";
}

inline std::optional<KernelKind> kernel_from_name(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "rbf") return KernelKind::Rbf;
  return std::nullopt;
}

/// Gram matrix between the columns of a and b: out(i, j) = kappa(a_i, b_j).
inline Matrix gram(const KernelFunction& k, const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "gram: dimension mismatch");
  require(a.cols() >= 1 && b.cols() >= 1, "gram: empty input");
  if (k.kind == KernelKind::Linear) return a.transpose() * b;
  require(k.sigma > 0.0, "gram: bandwidth must be positive");
  const Vector an = a.colwise().squaredNorm();
  const Vector bn = b.colwise().squaredNorm();
  Matrix d2 = -2.0 * a.transpose() * b;
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  // cancellation can leave tiny negatives on (near-)identical columns
  return (d2.cwiseMax(0.0) * (-0.5 / (k.sigma * k.sigma))).array().exp().matrix();
}

/// Double-centers a square Gram matrix so the implied feature map has zero
/// mean over the training columns.
inline Matrix center_gram(const Matrix& k) {
  require(k.rows() == k.cols(), "center_gram: matrix must be square");
  const Vector rm = k.rowwise().mean();
  const Eigen::RowVectorXd cm = k.colwise().mean();
  Matrix out = k;
  out.colwise() -= rm;
  out.rowwise() -= cm;
  out.array() += k.mean();
  return out;
}

// Training-side centering statistics, kept so columns for new samples can be
// centered against the same feature-space mean the fit used.
struct GramCenterer {
  Vector row_means;
  double grand_mean = 0.0;
};

inline GramCenterer gram_centerer(const Matrix& k) {
  require(k.rows() == k.cols(), "gram_centerer: matrix must be square");
  return {k.rowwise().mean(), k.mean()};
}

/// Centers a train-by-new cross-Gram block: column means come from the block
/// itself, row means and the grand mean from the stored training statistics.
inline Matrix center_cross_gram(const GramCenterer& s, const Matrix& cross) {
  require(cross.rows() == s.row_means.size(), "center_cross_gram: row count mismatch");
  const Eigen::RowVectorXd cm = cross.colwise().mean();
  Matrix out = cross;
  out.rowwise() -= cm;
  out.colwise() -= s.row_means;
  out.array() += s.grand_mean;
  return out;
}

/// Mean pairwise distance per view, averaged over views. Views with more
/// than max_pairs candidate pairs are subsampled deterministically; fully
/// degenerate data falls back to bandwidth 1.
inline double sigma_heuristic(const Dataset& data, std::uint64_t seed = 0,
                              Index max_pairs = 2000) {
  data.validate();
  require(max_pairs >= 1, "sigma_heuristic: max_pairs must be positive");
  const Index n = data.num_samples();
  if (n < 2) {
    warn("bandwidth heuristic: fewer than two samples, using 1");
    return 1.0;
  }
  double total = 0.0;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const Matrix& x = data.views[v];
    double sum = 0.0;
    Index count = 0;
    if (n * (n - 1) / 2 <= max_pairs) {
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j, ++count) sum += (x.col(i) - x.col(j)).norm();
    } else {
      Rng rng(derive_seed(seed, std::uint64_t(v)));
      for (; count < max_pairs; ++count) {
        const Index i = Index(rng.below(std::uint64_t(n)));
        Index j = Index(rng.below(std::uint64_t(n - 1)));
        if (j >= i) ++j;
        sum += (x.col(i) - x.col(j)).norm();
      }
    }
    total += sum / double(count);
  }
  const double sigma = total / double(data.views.size());
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    warn("bandwidth heuristic: degenerate pairwise distances, using 1");
    return 1.0;
  }
  return sigma;
}

// Kernelized model: directions live in the span of the training samples, so
// the per-view blocks hold one coefficient per training column.
struct KernelModel {
  MethodSpec spec;
  KernelFunction kernel;
  std::vector<std::string> view_names;
  std::vector<Index> input_dims;
  std::vector<Vector> means;
  std::vector<std::optional<PcaModel>> pca;
  std::vector<Matrix> train_features;  // preprocessed training columns
  std::vector<GramCenterer> centerers;
  EigenSolution solution;
};

/// Kernelized fit: each view is replaced by its centered training Gram
/// matrix and the same block assembly runs in sample space. The identity
/// metric becomes the block-diagonal of the centered Grams, which is the
/// unit-length constraint expressed on sample-space coefficients.
inline KernelModel fit_kernel(const Dataset& data, const MethodSpec& spec,
                              const KernelFunction& kernel) {
  data.validate();
  require(data.num_samples() >= 2, "fit_kernel: need at least two samples");
  if (method_supervised(spec.method))
    require(data.has_labels(), "fit_kernel: method requires labels");

  KernelModel model;
  model.spec = spec;
  model.kernel = kernel;
  model.view_names = data.view_names;
  const Index n = data.num_samples();

  std::vector<Matrix> kbars;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const Matrix& x = data.views[v];
    model.input_dims.push_back(x.rows());
    model.means.push_back(x.rowwise().mean());
    if (spec.pca_dims.has_value()) {
      require(*spec.pca_dims >= 0, "fit_kernel: pca_dims must be non-negative");
      Index k = std::min(x.rows(), n - 1);
      if (*spec.pca_dims > 0) k = std::min(k, Index(*spec.pca_dims));
      model.pca.emplace_back(pca_fit(x, k));
    } else {
      model.pca.emplace_back(std::nullopt);
    }
    model.train_features.push_back(detail::apply_preprocess(model.means[v], model.pca[v], x));
    const Matrix k = gram(kernel, model.train_features[v], model.train_features[v]);
    model.centerers.push_back(gram_centerer(k));
    kbars.push_back(center_gram(k));
  }

  const Index total = Index(data.views.size()) * n;
  require(spec.d >= 1 && Index(spec.d) <= total, "fit_kernel: d out of range");

  auto gp = assemble_blocks(kbars, data.labels, spec.method);
  if (spec.method == Method::MvPLS) {
    gp.q = Matrix::Zero(total, total);
    for (std::size_t v = 0; v < kbars.size(); ++v)
      gp.q.block(Index(v) * n, Index(v) * n, n, n) = kbars[v];
  }
  model.solution = solve_gep(gp.p, gp.q, spec.d, spec.delta);
  model.solution.view_offsets = gp.offsets;
  return model;
}

/// Projects columns through the kernel map: a centered cross-Gram against
/// the training samples, then the per-view coefficient block.
inline std::vector<Matrix> project_kernel(const KernelModel& m, const std::vector<Matrix>& views) {
  require(views.size() == m.means.size(), "project_kernel: view count mismatch");
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    require(views[v].rows() == m.input_dims[v],
            "project_kernel: view " + std::to_string(v) + " dimension mismatch");
    require(views[v].cols() >= 1, "project_kernel: empty view");
    require_finite(views[v], "project_kernel view " + std::to_string(v));
    const Matrix f = detail::apply_preprocess(m.means[v], m.pca[v], views[v]);
    const Matrix cross = gram(m.kernel, m.train_features[v], f);
    out.push_back(view_block(m.solution, v).transpose() *
                  center_cross_gram(m.centerers[v], cross));
  }
  return out;
}

// Random cosine features whose inner products approximate the smooth kernel.
struct RffMap {
  double sigma = 1.0;
  Matrix freqs;   // num_features x input_dim
  Vector phases;  // num_features
};

inline RffMap rff_fit(Index input_dim, Index num_features, double sigma, std::uint64_t seed) {
  require(input_dim >= 1, "rff_fit: input dimension must be positive");
  require(num_features >= 1, "rff_fit: feature count must be positive");
  require(sigma > 0.0, "rff_fit: bandwidth must be positive");
  Rng rng(seed);
  RffMap map;
  map.sigma = sigma;
  map.freqs = gaussian_matrix(rng, num_features, input_dim) / sigma;
  map.phases = Vector(num_features);
  for (Index i = 0; i < num_features; ++i)
    map.phases(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return map;
}

inline Matrix rff_transform(const RffMap& m, const Matrix& x) {
  require(x.rows() == m.freqs.cols(), "rff_transform: dimension mismatch");
  const Matrix z = ((m.freqs * x).colwise() + m.phases).array().cos().matrix();
  return std::sqrt(2.0 / double(m.freqs.rows())) * z;
}

struct RffModel {
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::vector<RffMap> maps;
  LinearModel base;  // fitted on the lifted features
};

/// Fits the linear method on random cosine features of each view, tracking
/// the smooth-kernel solution at cost linear in the sample count.
inline RffModel fit_rff(const Dataset& data, const MethodSpec& spec, double sigma,
                        Index num_features, std::uint64_t seed) {
  data.validate();
  require(sigma > 0.0, "fit_rff: bandwidth must be positive");
  require(num_features >= 1, "fit_rff: feature count must be positive");
  RffModel model;
  model.sigma = sigma;
  model.seed = seed;
  Dataset lifted;
  lifted.view_names = data.view_names;
  lifted.labels = data.labels;
  lifted.label_values = data.label_values;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    model.maps.push_back(rff_fit(data.views[v].rows(), num_features, sigma,
                                 derive_seed(seed, std::uint64_t(v))));
    lifted.views.push_back(rff_transform(model.maps[v], data.views[v]));
  }
  model.base = fit_linear(lifted, spec);
  return model;
}

inline std::vector<Matrix> project_rff(const RffModel& m, const std::vector<Matrix>& views) {
  require(views.size() == m.maps.size(), "project_rff: view count mismatch");
  std::vector<Matrix> lifted;
  for (std::size_t v = 0; v < views.size(); ++v) {
    require(views[v].rows() == m.maps[v].freqs.cols(),
            "project_rff: view " + std::to_string(v) + " dimension mismatch");
    require_finite(views[v], "project_rff view " + std::to_string(v));
    lifted.push_back(rff_transform(m.maps[v], views[v]));
  }
  return project(m.base, lifted);
}

}  // namespace mvembed
