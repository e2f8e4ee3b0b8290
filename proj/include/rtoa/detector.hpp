#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "rtoa/core.hpp"

namespace rtoa {

/// Finite detector with a smooth-edged plateau sensitivity of height W (mc^2).
struct WindowDetector {
  double height = 1e-5;   // W, mc^2
  double width = 0.01;    // Delta x_D, Angstrom
  double edge = 0.002;    // epsilon, Angstrom
  double position = 0.0;  // x_D, Angstrom

  void validate() const {
    if (!(edge > 0.0 && 2.0 * edge < width))
      throw Error(ErrorCode::InvalidArgument, "window detector needs 0 < 2 eps < width");
    if (!(height >= 0.0)) throw Error(ErrorCode::InvalidArgument, "detector height must be >= 0");
  }
};

/// Delta-function detector kappa * delta(x - x_D); kappa in units of c.
struct PointDetector {
  double kappa = 1.0;
  double position = 0.0;

  void validate() const {
    if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 0");
  }
};

using DetectorSpec = std::variant<WindowDetector, PointDetector>;

inline double detector_position(const DetectorSpec &d) {
  return std::visit([](const auto &v) { return v.position; }, d);
}

/// Sensitivity profile in [0, 1]: zero outside the window, exp(-d^2/(eps^2 - d^2)) on
/// each ramp (d measured from the inner edge of the ramp), one on the plateau.
inline double window_envelope(const WindowDetector &w, double x) {
  const double u = x - w.position;
  const double half = 0.5 * w.width;
  const double eps2 = w.edge * w.edge;
  auto ramp = [eps2](double d) {
    const double den = eps2 - d * d;
    return den <= 0.0 ? 0.0 : std::exp(-d * d / den);
  };
  if (u < -half || u >= half) return 0.0;
  if (u < -half + w.edge) return ramp(-half + w.edge - u);
  if (u < half - w.edge) return 1.0;
  return ramp(u - half + w.edge);
}

/// Absorption rate Lambda = g^+ g on a lattice, in 1/(Angstrom/c). The rate acts on
/// spinor components 1 and 2 only; components 3 and 4 are never absorbed.
struct RateField {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<double> rate;

  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
};

/// Cell-averaged 2 W chi envelope^2 on the sites of `grid`.
inline RateField lambda_field(const DetectorSpec &spec, const PlaneState &grid,
                              const PhysUnits &u = {}) {
  const auto *w = std::get_if<WindowDetector>(&spec);
  if (w == nullptr)
    throw Error(ErrorCode::InvalidArgument, "lambda_field: point detectors have no lattice field");
  w->validate();
  if (grid.dx > w->edge)
    throw Error(ErrorCode::UnderResolved, "lambda_field: grid spacing exceeds detector edge width");
  if (grid.x_min > w->position - 0.5 * w->width || grid.x_max() < w->position + 0.5 * w->width)
    throw Error(ErrorCode::GridTooNarrow, "lambda_field: grid does not cover the detector");

  constexpr int kSub = 32;
  RateField f{grid.x_min, grid.dx, std::vector<double>(grid.size(), 0.0)};
  const double scale = 2.0 * w->height * u.chi;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xc = grid.x(i);
    if (std::abs(xc - w->position) > 0.5 * w->width + grid.dx) continue;
    double acc = 0.0;
    for (int k = 0; k < kSub; ++k) {
      const double xs = xc + grid.dx * ((k + 0.5) / kSub - 0.5);
      const double e = window_envelope(*w, xs);
      acc += e * e;
    }
    f.rate[i] = scale * acc / kSub;
  }
  return f;
}

/// <psi | Lambda psi> = sum over sites of rate * (|psi_1|^2 + |psi_2|^2) dx.
inline double expectation(const RateField &f, const PlaneState &s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (f.rate[i] == 0.0) continue;
    acc += f.rate[i] * (std::norm(s.values[i][0]) + std::norm(s.values[i][1]));
  }
  return acc * s.dx;
}

}  // namespace rtoa
