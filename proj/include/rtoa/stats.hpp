#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/quadrature.hpp"

namespace rtoa {

/// Per-trajectory random stream: mt19937_64 keyed by (seed, trajectory index), so a
/// trajectory's draws do not depend on scheduling or on other trajectories.
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x7f4a7c15u};
    engine_.seed(seq);
  }

  /// Uniform in [0, 1) with 53 random bits; identical on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 &engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Piecewise-linear CDF built from density samples (trapezoid), normalized to end at 1.
class TabulatedCdf {
 public:
  TabulatedCdf(std::vector<double> x, const std::vector<double> &density)
      : x_(std::move(x)), c_(cumulative_trapezoid(x_, density)) {
    const double total = c_.back();
    if (!(total > 0.0)) throw Error(ErrorCode::NoDetection, "TabulatedCdf: zero total mass");
    for (double &v : c_) v /= total;
  }

  double operator()(double t) const {
    if (t <= x_.front()) return 0.0;
    if (t >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const auto i = static_cast<std::size_t>(it - x_.begin());
    const double f = (t - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return c_[i - 1] + f * (c_[i] - c_[i - 1]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> c_;
};

/// Two-sided Kolmogorov-Smirnov statistic sup |F_n - F|.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, const Cdf &cdf) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - f, f - lo});
  }
  return d;
}

/// Standard deviation of a binomial frequency.
inline double binomial_sigma(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace rtoa
