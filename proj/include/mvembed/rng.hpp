#pragma once

#include "mvembed/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mvembed {

// Deterministic random source. The raw stream is mt19937_64 (bit-stable per
// the standard); the real-valued draws are derived here rather than through
// std distributions so results do not depend on the standard library build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // [0, 1)
  double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two raw draws.
  double gaussian() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= threshold) return r % bound;
    }
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[std::size_t(below(std::uint64_t(i)))]);
  }

 private:
  std::mt19937_64 eng_;
};

// Stable per-stream seed derivation (splitmix-style mix).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Row-major fill so the draw order is part of the contract.
inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  return m;
}

inline Vector gaussian_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

}  // namespace mvembed
