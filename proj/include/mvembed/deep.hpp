#pragma once

#include "mvembed/linear.hpp"
#include "mvembed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace mvembed {

// Per-view network: rectified hidden layers, linear output. No hidden sizes
// means a single affine map.
struct Mlp {
  std::vector<Matrix> weights;  // layer l maps in -> out as out x in
  std::vector<Vector> biases;
};

inline Mlp mlp_init(Rng& rng, Index input_dim, const std::vector<Index>& hidden,
                    Index output_dim) {
  require(input_dim >= 1, "mlp_init: input dimension must be positive");
  require(output_dim >= 1, "mlp_init: output dimension must be positive");
  Mlp net;
  Index in = input_dim;
  auto add_layer = [&](Index out) {
    net.weights.push_back(std::sqrt(2.0 / double(in)) * gaussian_matrix(rng, out, in));
    net.biases.push_back(Vector::Zero(out));
    in = out;
  };
  for (Index h : hidden) {
    require(h >= 1, "mlp_init: hidden width must be positive");
    add_layer(h);
  }
  add_layer(output_dim);
  return net;
}

// acts[0] is the input; acts[l + 1] the post-activation output of layer l.
inline std::vector<Matrix> mlp_forward(const Mlp& net, const Matrix& x) {
  require(x.rows() == net.weights.front().cols(), "mlp_forward: dimension mismatch");
  std::vector<Matrix> acts{x};
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = (net.weights[l] * acts.back()).colwise() + net.biases[l];
    if (l + 1 < net.weights.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

inline Matrix mlp_output(const Mlp& net, const Matrix& x) { return mlp_forward(net, x).back(); }

struct MlpGrad {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Backpropagates out_grad (the objective's derivative with respect to the
/// network output) through the activations recorded by mlp_forward.
inline MlpGrad mlp_backward(const Mlp& net, const std::vector<Matrix>& acts,
                            const Matrix& out_grad) {
  const std::size_t layers = net.weights.size();
  MlpGrad g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Matrix delta = out_grad;
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0)
      delta = (net.weights[l].transpose() * delta)
                  .cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return g;
}

inline bool deep_supported(Method m) {
  return m == Method::MvCCA || m == Method::MvPLS || m == Method::MvMDA;
}

struct DeepConfig {
  Method method = Method::MvCCA;
  int d = 10;
  double delta = 1e-6;
  std::vector<Index> hidden = {64};
  Index output_dim = 32;
  int epochs = 50;
  Index batch = 200;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

/// Sample-pairing matrix the deep objective couples views with: the centering
/// projector for the correlation methods, the between-class graph otherwise.
inline Matrix deep_pairing(Method method, Index n, const std::vector<int>& labels) {
  if (method == Method::MvMDA) return laplacian_between_modular(class_indicators(labels));
  return laplacian_total(n);
}

namespace detail {

// Block assembly over network outputs. Unlike the input-space path no sample
// normalization is applied; the constraint renormalization absorbs scale.
inline GraphPair deep_assemble(Method method, const std::vector<Matrix>& outputs,
                               const std::vector<int>& labels) {
  const Index b = outputs.front().cols();
  GraphPair gp;
  gp.offsets.assign(1, 0);
  for (const Matrix& h : outputs) gp.offsets.push_back(gp.offsets.back() + h.rows());
  const Index total = gp.offsets.back();
  gp.p = Matrix::Zero(total, total);
  gp.q = Matrix::Zero(total, total);

  const Matrix pair = deep_pairing(method, b, labels);
  const bool cross_only = method != Method::MvMDA;
  Matrix metric;
  if (method == Method::MvCCA) metric = pair;
  if (method == Method::MvMDA) metric = laplacian_within(class_indicators(labels));

  const std::size_t v = outputs.size();
  for (std::size_t i = 0; i < v; ++i) {
    const auto ri = Eigen::seqN(gp.offsets[i], gp.offsets[i + 1] - gp.offsets[i]);
    for (std::size_t j = 0; j < v; ++j) {
      if (cross_only && i == j) continue;
      const auto rj = Eigen::seqN(gp.offsets[j], gp.offsets[j + 1] - gp.offsets[j]);
      gp.p(ri, rj) = outputs[i] * pair * outputs[j].transpose();
    }
    if (method == Method::MvPLS) continue;
    gp.q(ri, ri) = outputs[i] * metric * outputs[i].transpose();
  }
  if (method == Method::MvPLS) gp.q = Matrix::Identity(total, total);
  return gp;
}

// Rescales the stacked directions so w' q w is the identity exactly, not
// just up to the solver's ridge. Fails when the constraint Gram loses rank.
inline bool renorm_constraint(Matrix& w, const Matrix& q) {
  const Matrix gram = w.transpose() * q * w;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) return false;
  const Matrix solved = llt.matrixL().solve(w.transpose());
  w = solved.transpose();
  return true;
}

// Batch labels remapped to a contiguous range; second element is the number
// of distinct classes present.
inline std::pair<std::vector<int>, int> compact_labels(const std::vector<int>& labels,
                                                       const std::vector<Index>& idx) {
  std::vector<int> sub;
  sub.reserve(idx.size());
  for (Index i : idx) sub.push_back(labels[std::size_t(i)]);
  std::vector<int> uniq = sub;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  for (int& l : sub)
    l = int(std::lower_bound(uniq.begin(), uniq.end(), l) - uniq.begin()) + 1;
  return {std::move(sub), int(uniq.size())};
}

}  // namespace detail

/// Coupling objective at fixed directions: half the sum over ordered view
/// pairs of Tr(W_i' H_i L H_j' W_j). Its derivative in H_i is embed_grad.
inline double deep_objective(Method method, const std::vector<Matrix>& outputs,
                             const EigenSolution& sol, const std::vector<int>& labels) {
  const Matrix pair = deep_pairing(method, outputs.front().cols(), labels);
  const bool all_pairs = method == Method::MvMDA;
  double value = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const Matrix yi = view_block(sol, i).transpose() * outputs[i];
    for (std::size_t j = 0; j < outputs.size(); ++j) {
      if (!all_pairs && i == j) continue;
      const Matrix yj = view_block(sol, j).transpose() * outputs[j];
      value += 0.5 * (yi * pair * yj.transpose()).trace();
    }
  }
  return value;
}

/// Gradient of the coupling objective with respect to each view's outputs:
/// G_i = W_i (sum over partner views of W_j' H_j) L.
inline std::vector<Matrix> embed_grad(Method method, const std::vector<Matrix>& outputs,
                                      const EigenSolution& sol, const std::vector<int>& labels) {
  const Matrix pair = deep_pairing(method, outputs.front().cols(), labels);
  const bool all_pairs = method == Method::MvMDA;
  Matrix sum = Matrix::Zero(sol.vectors.cols(), outputs.front().cols());
  for (std::size_t j = 0; j < outputs.size(); ++j)
    sum += view_block(sol, j).transpose() * outputs[j];
  std::vector<Matrix> grads;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    Matrix partners = sum;
    if (!all_pairs) partners -= view_block(sol, i).transpose() * outputs[i];
    grads.push_back(view_block(sol, i) * (partners * pair));
  }
  return grads;
}

struct DeepModel {
  DeepConfig config;
  std::vector<std::string> view_names;
  std::vector<Index> input_dims;
  std::vector<Mlp> nets;
  EigenSolution solution;            // stacked over per-view output dims
  std::vector<double> objective_log;  // full-data eigenvalue sum per epoch
};

/// Alternating training: per batch, re-solve the directions on the current
/// outputs, renormalize them onto the constraint, and take one ascent step
/// on the network parameters. Directions are refreshed on the full data at
/// the end of every epoch; the last refresh is the model's solution.
inline DeepModel fit_deep(const Dataset& data, const DeepConfig& config) {
  data.validate();
  require(deep_supported(config.method), "fit_deep: unsupported method");
  require(data.num_samples() >= 2, "fit_deep: need at least two samples");
  if (config.method == Method::MvMDA) {
    require(data.has_labels(), "fit_deep: method requires labels");
    require(data.num_classes() >= 2, "fit_deep: method needs at least two classes");
  }
  require(config.epochs >= 1, "fit_deep: epochs must be positive");
  require(config.batch >= 2, "fit_deep: batch size must be at least two");
  require(config.lr >= 0.0, "fit_deep: learning rate must be non-negative");
  require(config.output_dim >= 1, "fit_deep: output dimension must be positive");
  const Index total = Index(data.views.size()) * config.output_dim;
  require(config.d >= 1 && Index(config.d) <= total, "fit_deep: d out of range");

  DeepModel model;
  model.config = config;
  model.view_names = data.view_names;
  const std::size_t nviews = data.views.size();
  for (std::size_t v = 0; v < nviews; ++v) {
    model.input_dims.push_back(data.views[v].rows());
    Rng init_rng(derive_seed(config.seed, std::uint64_t(v)));
    model.nets.push_back(
        mlp_init(init_rng, data.views[v].rows(), config.hidden, config.output_dim));
  }

  const Index n = data.num_samples();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  Rng shuffle_rng(derive_seed(config.seed, 0x5a11ull));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.lr > 0.0) {
      shuffle_rng.shuffle(order);
      for (Index start = 0; start < n; start += config.batch) {
        const Index b = std::min(config.batch, n - start);
        if (b < 2) {
          warn("skipping a single-sample batch");
          continue;
        }
        const std::vector<Index> idx(order.begin() + start, order.begin() + start + b);
        std::vector<int> batch_labels;
        if (config.method == Method::MvMDA) {
          auto [remapped, classes] = detail::compact_labels(data.labels, idx);
          if (classes < 2) {
            warn("skipping a batch without class diversity");
            continue;
          }
          batch_labels = std::move(remapped);
        }
        const Dataset batch = subset_columns(data, idx);
        std::vector<std::vector<Matrix>> acts;
        std::vector<Matrix> outputs;
        for (std::size_t v = 0; v < nviews; ++v) {
          acts.push_back(mlp_forward(model.nets[v], batch.views[v]));
          outputs.push_back(acts.back().back());
        }
        auto gp = detail::deep_assemble(config.method, outputs, batch_labels);
        EigenSolution sol;
        try {
          sol = solve_gep(gp.p, gp.q, config.d, config.delta);
        } catch (const SingularMetric&) {
          warn("skipping a batch with a degenerate metric");
          continue;
        }
        if (!detail::renorm_constraint(sol.vectors, gp.q)) {
          warn("skipping a batch whose constraint lost rank");
          continue;
        }
        sol.view_offsets = gp.offsets;
        const auto grads = embed_grad(config.method, outputs, sol, batch_labels);
        for (std::size_t v = 0; v < nviews; ++v) {
          const MlpGrad g = mlp_backward(model.nets[v], acts[v], grads[v]);
          for (std::size_t l = 0; l < model.nets[v].weights.size(); ++l) {
            model.nets[v].weights[l] += config.lr * g.weights[l];
            model.nets[v].biases[l] += config.lr * g.biases[l];
          }
        }
      }
    }

    std::vector<Matrix> outputs;
    for (std::size_t v = 0; v < nviews; ++v)
      outputs.push_back(mlp_output(model.nets[v], data.views[v]));
    auto gp = detail::deep_assemble(config.method, outputs, data.labels);
    EigenSolution sol = solve_gep(gp.p, gp.q, config.d, config.delta);
    if (!detail::renorm_constraint(sol.vectors, gp.q))
      warn("constraint renormalization failed on the full data");
    sol.view_offsets = gp.offsets;
    model.solution = std::move(sol);
    model.objective_log.push_back(model.solution.rho);
    log_msg(LogLevel::Info, "epoch " + std::to_string(epoch + 1) + " objective " +
                                std::to_string(model.solution.rho));
  }
  return model;
}

inline std::vector<Matrix> project_deep(const DeepModel& m, const std::vector<Matrix>& views) {
  require(views.size() == m.nets.size(), "project_deep: view count mismatch");
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    require(views[v].rows() == m.input_dims[v],
            "project_deep: view " + std::to_string(v) + " dimension mismatch");
    require(views[v].cols() >= 1, "project_deep: empty view");
    require_finite(views[v], "project_deep view " + std::to_string(v));
    out.push_back(view_block(m.solution, v).transpose() * mlp_output(m.nets[v], views[v]));
  }
  return out;
}

/// Central-difference check of the parameter gradients implied by embed_grad
/// and mlp_backward, at fixed directions. Returns the worst relative error;
/// perturb injects an error into one analytic coordinate to prove the check
/// can fail.
inline double gradcheck_deep(const Dataset& data, const DeepConfig& config, double step = 1e-5,
                             double perturb = 0.0) {
  data.validate();
  require(deep_supported(config.method), "gradcheck_deep: unsupported method");
  if (config.method == Method::MvMDA) {
    require(data.has_labels(), "gradcheck_deep: method requires labels");
    require(data.num_classes() >= 2, "gradcheck_deep: method needs at least two classes");
  }
  require(step > 0.0, "gradcheck_deep: step must be positive");

  std::vector<Mlp> nets;
  std::vector<std::vector<Matrix>> acts;
  std::vector<Matrix> outputs;
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    Rng init_rng(derive_seed(config.seed, std::uint64_t(v)));
    nets.push_back(mlp_init(init_rng, data.views[v].rows(), config.hidden, config.output_dim));
    acts.push_back(mlp_forward(nets[v], data.views[v]));
    outputs.push_back(acts.back().back());
  }
  auto gp = detail::deep_assemble(config.method, outputs, data.labels);
  EigenSolution sol = solve_gep(gp.p, gp.q, config.d, config.delta);
  detail::renorm_constraint(sol.vectors, gp.q);
  sol.view_offsets = gp.offsets;

  const auto grads = embed_grad(config.method, outputs, sol, data.labels);
  double worst = 0.0;
  bool inject = perturb != 0.0;
  for (std::size_t v = 0; v < nets.size(); ++v) {
    MlpGrad g = mlp_backward(nets[v], acts[v], grads[v]);
    if (inject && g.weights[0].size() > 0) {
      g.weights[0](0, 0) += perturb * (1.0 + std::abs(g.weights[0](0, 0)));
      inject = false;
    }
    Mlp net = nets[v];
    auto objective_here = [&]() {
      std::vector<Matrix> outs = outputs;
      outs[v] = mlp_output(net, data.views[v]);
      return deep_objective(config.method, outs, sol, data.labels);
    };
    auto probe = [&](double& param, double analytic) {
      const double save = param;
      param = save + step;
      const double hi = objective_here();
      param = save - step;
      const double lo = objective_here();
      param = save;
      const double fd = (hi - lo) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (Index r = 0; r < net.weights[l].rows(); ++r)
        for (Index c = 0; c < net.weights[l].cols(); ++c)
          probe(net.weights[l](r, c), g.weights[l](r, c));
      for (Index r = 0; r < net.biases[l].size(); ++r)
        probe(net.biases[l](r), g.biases[l](r));
    }
  }
  return worst;
}

}  // namespace mvembed
