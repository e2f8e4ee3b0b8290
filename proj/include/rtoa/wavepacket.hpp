#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/quadrature.hpp"

namespace rtoa {

/// Gaussian preparation: spinor (1,0,0,0), width eta, mean momentum p0, prepared at (t0, x0).
struct PacketSpec {
  double p0 = 0.75;   // mc
  double eta = 0.1;   // Angstrom
  double x0 = -1.0;   // Angstrom
  double t0 = 0.0;    // Angstrom/c

  void validate() const {
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "packet width eta must be positive");
    if (!std::isfinite(p0) || !std::isfinite(x0) || !std::isfinite(t0))
      throw Error(ErrorCode::InvalidArgument, "packet parameters must be finite");
  }
};

/// Momentum standard deviation of the prepared packet, hbar/(2 eta), in mc.
inline double momentum_sigma(const PacketSpec &spec, const PhysUnits &u) {
  return 1.0 / (2.0 * spec.eta * u.chi);
}

/// Prepared state at t0 on `grid`, with the spinor pointing along component 1.
inline PlaneState initial_packet(const PacketSpec &spec, const PlaneState &grid,
                                 const PhysUnits &u = {}) {
  spec.validate();
  const double reach = 8.0 * spec.eta;
  if (grid.x_min > spec.x0 - reach || grid.x_max() < spec.x0 + reach)
    throw Error(ErrorCode::GridTooNarrow, "grid does not cover x0 +- 8 eta");
  PlaneState s = grid;
  const double amp = 1.0 / (std::pow(2.0 * std::numbers::pi, 0.25) * std::sqrt(spec.eta));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s.x(i) - spec.x0;
    const double env = amp * std::exp(-y * y / (4.0 * spec.eta * spec.eta));
    s.values[i] = {std::polar(env, u.chi * spec.p0 * y), 0.0, 0.0, 0.0};
  }
  return s;
}

/// Weights of the positive-energy spinor (1,0,0,p/(E+1)) e^{i chi(p y - E s)} and of the
/// negative-energy spinor (p/(E+1),0,0,1) e^{-i chi(p y - E s)}.
struct SpectralCoeffs {
  cplx a_plus;
  cplx b_plus;
};

/// Momentum-space representation of a prepared packet, sampled on composite
/// Gauss-Legendre nodes. A-branch nodes cover p0 +- 10 sigma_p, B-branch nodes the
/// mirrored window around -p0. The overall constant is fixed numerically so that the
/// reconstructed state has unit norm.
class SpectralPacket {
 public:
  struct Node {
    double p;
    double energy;
    double weight;  // quadrature weight times coefficient magnitude
  };

  explicit SpectralPacket(const PacketSpec &spec, const PhysUnits &u = {},
                          std::size_t panels = 64, std::size_t order = 32)
      : spec_(spec), units_(u) {
    spec.validate();
    const double sp = momentum_sigma(spec, u);
    const auto ra = composite_gauss_legendre(spec.p0 - 10.0 * sp, spec.p0 + 10.0 * sp, panels, order);
    const auto rb = composite_gauss_legendre(-spec.p0 - 10.0 * sp, -spec.p0 + 10.0 * sp, panels, order);
    const double k = spec.eta * spec.eta * u.chi * u.chi;
    double norm = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
      const double p = ra.nodes[i], e = energy(p);
      const double c = (e + 1.0) / (2.0 * e) * std::exp(-k * (p - spec.p0) * (p - spec.p0));
      a_.push_back({p, e, ra.weights[i] * c});
      norm += ra.weights[i] * c * c * (1.0 + sq(p / (e + 1.0)));
    }
    for (std::size_t i = 0; i < rb.size(); ++i) {
      const double p = rb.nodes[i], e = energy(p);
      const double c = p / (2.0 * e) * std::exp(-k * (p + spec.p0) * (p + spec.p0));
      b_.push_back({p, e, rb.weights[i] * c});
      norm += rb.weights[i] * c * c * (1.0 + sq(p / (e + 1.0)));
    }
    // Parseval: ||Psi||^2 = (2 pi / chi) * integral over both orthogonal branches.
    normalization_ = 1.0 / std::sqrt(2.0 * std::numbers::pi / u.chi * norm);
    for (auto &n : a_) n.weight *= normalization_;
    for (auto &n : b_) n.weight *= normalization_;
  }

  const PacketSpec &spec() const { return spec_; }
  const PhysUnits &units() const { return units_; }
  double normalization() const { return normalization_; }
  const std::vector<Node> &a_nodes() const { return a_; }
  const std::vector<Node> &b_nodes() const { return b_; }

  /// Coefficients at momentum p relative to a space-time origin:
  /// Psi(origin.t + s, origin.x + y) = int dp [A u(p) e^{i chi(p y - E s)} + B v(p) e^{-i chi(p y - E s)}].
  SpectralCoeffs coefficients(double p, TwoVector origin) const {
    const double e = energy(p);
    const double k = spec_.eta * spec_.eta * units_.chi * units_.chi;
    const double dy = origin.x - spec_.x0, ds = origin.t - spec_.t0;
    const double ga = normalization_ * (e + 1.0) / (2.0 * e) * std::exp(-k * sq(p - spec_.p0));
    const double gb = normalization_ * p / (2.0 * e) * std::exp(-k * sq(p + spec_.p0));
    const double phase = units_.chi * (p * dy - e * ds);
    return {std::polar(ga, phase), std::polar(gb, -phase)};
  }

  /// Exact free solution at lab point (t, x).
  Spinor4 evaluate(double t, double x) const {
    const double y = x - spec_.x0, s = t - spec_.t0;
    const double chi = units_.chi;
    cplx c1 = 0.0, c4 = 0.0;
    for (const auto &n : a_) {
      const cplx w = std::polar(n.weight, chi * (n.p * y - n.energy * s));
      c1 += w;
      c4 += w * (n.p / (n.energy + 1.0));
    }
    for (const auto &n : b_) {
      const cplx w = std::polar(n.weight, -chi * (n.p * y - n.energy * s));
      c1 += w * (n.p / (n.energy + 1.0));
      c4 += w;
    }
    return {c1, 0.0, 0.0, c4};
  }

  /// The solution restricted to the plane of constant lab time t, sampled at
  /// x_i = x_offset + grid.x(i).
  PlaneState plane_state(double t, const PlaneState &grid, double x_offset = 0.0) const {
    PlaneState s = grid;
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = evaluate(t, grid.x(i) + x_offset);
    return s;
  }

 private:
  static double sq(double v) { return v * v; }

  PacketSpec spec_;
  PhysUnits units_;
  double normalization_ = 1.0;
  std::vector<Node> a_;
  std::vector<Node> b_;
};

inline SpectralCoeffs spectral_coefficients(const PacketSpec &spec, double p,
                                            TwoVector origin, const PhysUnits &u = {}) {
  return SpectralPacket(spec, u).coefficients(p, origin);
}

inline Spinor4 evaluate_spacetime(const PacketSpec &spec, double t, double x,
                                  const PhysUnits &u = {}) {
  return SpectralPacket(spec, u).evaluate(t, x);
}

/// Scalar product on the tilted plane {(y.t + alpha s, y.x + s)} with metric
/// factor [1 - gamma0 gamma1 alpha]; independent of y and alpha for free solutions.
inline cplx tilted_inner(const SpectralPacket &a, const SpectralPacket &b, TwoVector y,
                         double alpha, double ds = 0.001) {
  if (!(std::abs(alpha) < 1.0))
    throw Error(ErrorCode::InvalidVelocity, "tilted_inner: |alpha| must be < 1");
  // Where each branch of each packet crosses the plane.
  double lo = 1e300, hi = -1e300, width = 0.0;
  for (const SpectralPacket *pk : {&a, &b}) {
    const auto &sp = pk->spec();
    const double vg = sp.p0 / energy(sp.p0);
    for (double v : {vg, -vg}) {
      const double s = (sp.x0 - y.x + v * (y.t - sp.t0)) / (1.0 - alpha * v);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    width = std::max(width, sp.eta);
  }
  const double margin = (12.0 * width + 0.2) / (1.0 - std::abs(alpha));
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo + 2.0 * margin) / ds));
  const double s0 = lo - margin;
  cplx sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = s0 + (static_cast<double>(i) + 0.5) * ds;
    const Spinor4 pa = a.evaluate(y.t + alpha * s, y.x + s);
    const Spinor4 pb = (&a == &b) ? pa : b.evaluate(y.t + alpha * s, y.x + s);
    // (1 - alpha gamma0 gamma1) pb; gamma0 gamma1 swaps 1<->4 and 2<->3.
    const Spinor4 m{pb[0] - alpha * pb[3], pb[1] - alpha * pb[2], pb[2] - alpha * pb[1],
                    pb[3] - alpha * pb[0]};
    sum += dot(pa, m);
  }
  return sum * ds;
}

}  // namespace rtoa
