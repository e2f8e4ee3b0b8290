#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "rtoa/core.hpp"

namespace rtoa {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "gauss_legendre: n must be positive");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        const double dk = static_cast<double>(k);
        p0 = ((2.0 * dk - 1.0) * z * p1 - (dk - 1.0) * p2) / dk;
      }
      dp = dn * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels of `order` nodes.
inline QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                               std::size_t order) {
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule r;
  r.nodes.reserve(panels * order);
  r.weights.reserve(panels * order);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t k = 0; k < order; ++k) {
      r.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
      r.weights.push_back(0.5 * h * base.weights[k]);
    }
  }
  return r;
}

/// Trapezoid rule over samples y(x_i) on a non-uniform abscissa.
inline double trapezoid(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

/// Running trapezoid integral; result[0] = 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double> &x,
                                                const std::vector<double> &y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "trapezoid: size mismatch");
  std::vector<double> c(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) c[i] = c[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return c;
}

}  // namespace rtoa
