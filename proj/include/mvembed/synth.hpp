#pragma once

#include "mvembed/dataset.hpp"
#include "mvembed/rng.hpp"

#include <string>
#include <vector>

namespace mvembed {

struct SynthSpec {
  Index n = 300;
  Index latent_dim = 5;
  std::vector<Index> view_dims;
  double noise = 0.1;
  int classes = 0;          // 0 generates unlabeled data
  double separation = 1.0;  // distance of each class mean from the origin
  std::uint64_t seed = 0;
};

struct SynthResult {
  Dataset data;
  std::vector<Matrix> mixing;  // per view: D_v x latent_dim
  Matrix class_means;          // latent_dim x classes, empty when unlabeled
};

// Shared-latent generator: z_i ~ N(0, I) plus a class-mean offset when
// labeled, observed per view as A_v z_i + noise * e_vi. Every random
// component draws from its own derived stream, so enlarging the view list
// changes nothing about the views already present.
inline SynthResult synth_generate(const SynthSpec& spec) {
  require(spec.n >= 1, "synth_generate: need at least one sample");
  require(spec.latent_dim >= 1, "synth_generate: latent dimension must be positive");
  require(spec.view_dims.size() >= 2, "synth_generate: need at least two views");
  for (Index d : spec.view_dims)
    require(d >= 1, "synth_generate: view dimensions must be positive");
  require(spec.noise >= 0.0, "synth_generate: noise must be non-negative");
  require(spec.classes >= 0, "synth_generate: class count must be non-negative");
  require(spec.classes == 0 || Index(spec.classes) <= spec.n,
          "synth_generate: more classes than samples");
  require(spec.separation >= 0.0, "synth_generate: separation must be non-negative");

  SynthResult out;
  Rng latent_rng(derive_seed(spec.seed, 0x1a7e47ull));
  Matrix z = gaussian_matrix(latent_rng, spec.latent_dim, spec.n);

  if (spec.classes > 0) {
    Rng mean_rng(derive_seed(spec.seed, 0xc1a55ull));
    out.class_means.resize(spec.latent_dim, spec.classes);
    for (int c = 0; c < spec.classes; ++c) {
      const Vector dir = gaussian_vector(mean_rng, spec.latent_dim);
      require(dir.norm() > 0.0, "synth_generate: degenerate class direction");
      out.class_means.col(c) = (spec.separation / dir.norm()) * dir;
    }
    out.data.labels.resize(std::size_t(spec.n));
    for (Index i = 0; i < spec.n; ++i) {
      const int c = int(i % Index(spec.classes));
      out.data.labels[std::size_t(i)] = c + 1;
      z.col(i) += out.class_means.col(c);
    }
  }

  for (std::size_t v = 0; v < spec.view_dims.size(); ++v) {
    Rng mix_rng(derive_seed(spec.seed, 0xa000ull + v));
    out.mixing.push_back(gaussian_matrix(mix_rng, spec.view_dims[v], spec.latent_dim));
    Matrix x = out.mixing.back() * z;
    if (spec.noise > 0.0) {
      Rng noise_rng(derive_seed(spec.seed, 0xe000ull + v));
      x += spec.noise * gaussian_matrix(noise_rng, spec.view_dims[v], spec.n);
    }
    out.data.views.push_back(std::move(x));
    out.data.view_names.push_back("view" + std::to_string(v));
  }
  out.data.validate();
  return out;
}

}  // namespace mvembed
