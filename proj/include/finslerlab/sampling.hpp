#pragma once

/// \file
/// Deterministic admissible-point sampling from coordinate boxes.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "finslerlab/finsler.hpp"

namespace finslerlab {

inline constexpr double kMinFiberNorm = 0.1;
inline constexpr double kMinBeta = 0.1;

struct SampleBox {
  double x_lo = -1.0;
  double x_hi = 1.0;
  double y_lo = -2.0;
  double y_hi = 2.0;
};

/// True when every leading principal minor of the symmetric matrix is positive.
inline bool positive_definite(const Mat& a) {
  const int n = a.rows();
  for (int k = 1; k <= n; ++k) {
    Mat sub = zeros(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub(i, j) = a(i, j);
    if (!(determinant(sub) > 0.0)) return false;
  }
  return true;
}

/// L > 0, g positive definite, and L/|y| bounded (keeps samples away from
/// the singular locus of Kropina-type metrics).
inline bool admissible(const MetricSpec& m, const PointState& p, double max_stretch = 10.0) {
  try {
    const auto t = geometry(m, p);
    double ny = 0.0;
    for (double v : p.y) ny += v * v;
    ny = std::sqrt(ny);
    return positive_definite(t.g) && t.L <= max_stretch * ny;
  } catch (const Error&) {
    return false;
  }
}

class PointSampler {
 public:
  using Predicate = std::function<bool(const PointState&)>;

  PointSampler(int dimension, std::uint64_t seed, SampleBox box = {}, Predicate accept = {})
      : n_(dimension), rng_(seed), box_(box), accept_(std::move(accept)) {}

  /// Next point with |y| >= 0.1 that satisfies the predicate. Gives up after
  /// `max_tries` rejections.
  PointState next(int max_tries = 10000) {
    std::uniform_real_distribution<double> ux(box_.x_lo, box_.x_hi);
    std::uniform_real_distribution<double> uy(box_.y_lo, box_.y_hi);
    for (int attempt = 0; attempt < max_tries; ++attempt) {
      PointState p{Vec(static_cast<std::size_t>(n_)), Vec(static_cast<std::size_t>(n_))};
      for (auto& v : p.x) v = ux(rng_);
      for (auto& v : p.y) v = uy(rng_);
      double ny = 0.0;
      for (double v : p.y) ny += v * v;
      if (std::sqrt(ny) < kMinFiberNorm) continue;
      if (accept_ && !accept_(p)) continue;
      return p;
    }
    throw InadmissiblePointError("sampler: no admissible point found after " +
                                 std::to_string(max_tries) + " tries");
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  int n_;
  std::mt19937_64 rng_;
  SampleBox box_;
  Predicate accept_;
};

inline PointSampler metric_sampler(const MetricSpec& m, std::uint64_t seed, SampleBox box = {}) {
  return PointSampler(m.dimension, seed, box, [m](const PointState& p) { return admissible(m, p); });
}

}  // namespace finslerlab
