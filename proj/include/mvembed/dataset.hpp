#pragma once

#include "mvembed/core.hpp"
#include "mvembed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace mvembed {

// A multi-view sample set. Views share the sample axis (columns); the v-th
// view is D_v x N. Labels, when present, are 1-based and contiguous.
struct Dataset {
  std::vector<std::string> view_names;
  std::vector<Matrix> views;
  std::vector<int> labels;                // empty when unlabeled
  std::vector<long long> label_values;    // original label per class, when remapped

  Index num_samples() const { return views.empty() ? 0 : views.front().cols(); }
  int num_views() const { return int(views.size()); }
  bool has_labels() const { return !labels.empty(); }

  int num_classes() const {
    int c = 0;
    for (int v : labels) c = std::max(c, v);
    return c;
  }

  void validate() const {
    require(views.size() >= 2, "dataset: need at least two views");
    require(view_names.empty() || view_names.size() == views.size(),
            "dataset: view name count mismatch");
    const Index n = views.front().cols();
    require(n >= 1, "dataset: no samples");
    for (std::size_t v = 0; v < views.size(); ++v) {
      require(views[v].rows() >= 1, "dataset: view " + std::to_string(v) + " has no features");
      require(views[v].cols() == n, "dataset: view " + std::to_string(v) + " sample count differs");
      require_finite(views[v], "dataset view " + std::to_string(v));
    }
    if (!labels.empty()) {
      require(Index(labels.size()) == n, "dataset: label count differs from sample count");
      int cmax = 0;
      for (int l : labels) {
        require(l >= 1, "dataset: labels must be 1-based");
        cmax = std::max(cmax, l);
      }
      std::vector<bool> seen(std::size_t(cmax), false);
      for (int l : labels) seen[std::size_t(l - 1)] = true;
      for (std::size_t c = 0; c < seen.size(); ++c)
        require(seen[c], "dataset: class " + std::to_string(c + 1) + " has no members");
    }
  }
};

inline Dataset subset_columns(const Dataset& data, const std::vector<Index>& idx) {
  Dataset out;
  out.view_names = data.view_names;
  out.label_values = data.label_values;
  for (const Matrix& x : data.views) {
    Matrix sel(x.rows(), Index(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sel.col(Index(k)) = x.col(idx[k]);
    out.views.push_back(std::move(sel));
  }
  if (!data.labels.empty()) {
    out.labels.reserve(idx.size());
    for (Index i : idx) out.labels.push_back(data.labels[std::size_t(i)]);
  }
  return out;
}

struct SplitResult {
  Dataset train;
  Dataset validation;
};

// Seeded train/validation split, applied to the shared sample axis so every
// view stays aligned. Labeled data is split per class (proportions hold to
// within one sample); a class with a single member always trains.
inline SplitResult split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
  data.validate();
  require(train_fraction > 0.0 && train_fraction < 1.0,
          "split_dataset: train fraction must lie strictly between 0 and 1");
  const Index n = data.num_samples();
  Rng rng(seed);
  std::vector<Index> train_idx, val_idx;
  if (!data.has_labels()) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index(0));
    rng.shuffle(perm);
    const auto k = std::size_t(std::llround(train_fraction * double(n)));
    train_idx.assign(perm.begin(), perm.begin() + std::ptrdiff_t(k));
    val_idx.assign(perm.begin() + std::ptrdiff_t(k), perm.end());
  } else {
    for (int c = 1; c <= data.num_classes(); ++c) {
      std::vector<Index> members;
      for (Index i = 0; i < n; ++i)
        if (data.labels[std::size_t(i)] == c) members.push_back(i);
      rng.shuffle(members);
      auto k = std::size_t(std::llround(train_fraction * double(members.size())));
      if (members.size() == 1) {
        warn("split_dataset: class " + std::to_string(c) +
             " has a single sample; keeping it in the training split");
        k = 1;
      }
      k = std::max<std::size_t>(k, 1);
      train_idx.insert(train_idx.end(), members.begin(), members.begin() + std::ptrdiff_t(k));
      val_idx.insert(val_idx.end(), members.begin() + std::ptrdiff_t(k), members.end());
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  return {subset_columns(data, train_idx), subset_columns(data, val_idx)};
}

}  // namespace mvembed
