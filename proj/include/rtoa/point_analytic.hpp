#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rtoa/arrival.hpp"
#include "rtoa/core.hpp"
#include "rtoa/experiment.hpp"
#include "rtoa/wavepacket.hpp"

namespace rtoa {

/// Plane-wave scattering amplitudes off kappa delta(x) acting on the upper components.
/// Particle branch: u(p) e^{ipx} + R u(-p) e^{-ipx} | T u(p) e^{ipx}, u(p) = (1,0,0,q).
/// Anti-particle branch: v(p) e^{-ipx} + R v(-p) e^{ipx} | T v(p) e^{-ipx}, v(p) = (q,0,0,1).
/// Here q = p/(E+1).
struct ScatterCoeffs {
  double T_particle = 1.0;
  double R_particle = 0.0;
  double T_anti = 1.0;
  double R_anti = 0.0;
};

/// Residuals of the matching conditions at the detector (kappa in units of c):
/// components 1 and 2 continuous, [psi_3] = -kappa/2 psi_2(0), [psi_4] = -kappa/2 psi_1(0).
inline std::array<cplx, 4> jump_residual(const Spinor4 &left, const Spinor4 &right,
                                         const Spinor4 &at_origin, double kappa) {
  const double h = 0.5 * kappa;
  return {right[0] - left[0], right[1] - left[1], right[2] - left[2] + h * at_origin[1],
          right[3] - left[3] + h * at_origin[0]};
}

namespace detail {
// Solves [[a, b], [c, d]] (x, y) = (e, f).
inline std::array<double, 2> solve2(double a, double b, double c, double d, double e, double f) {
  const double det = a * d - b * c;
  if (det == 0.0) throw Error(ErrorCode::InvalidArgument, "scatter_coefficients: singular matching system");
  return {(e * d - b * f) / det, (a * f - e * c) / det};
}
}  // namespace detail

inline ScatterCoeffs scatter_coefficients(double p, double kappa) {
  if (p == 0.0) throw Error(ErrorCode::InvalidArgument, "scatter_coefficients: degenerate momentum p = 0");
  if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scatter_coefficients: kappa must be >= 0");
  const double q = p / (energy(p) + 1.0);
  const double h = 0.5 * kappa;
  ScatterCoeffs s;
  // Particle: [psi_1]: T - R = 1; [psi_4]: T (q + h) + R q = q.
  const auto tp = detail::solve2(1.0, -1.0, q + h, q, 1.0, q);
  s.T_particle = tp[0];
  s.R_particle = tp[1];
  // Anti-particle: [psi_1]: T q + R q = q; [psi_4]: T (1 + h q) - R = 1.
  const auto ta = detail::solve2(q, q, 1.0 + h * q, -1.0, q, 1.0);
  s.T_anti = ta[0];
  s.R_anti = ta[1];
  return s;
}

/// Left and right limits of the assembled plane-wave solutions at x = 0.
struct BranchLimits {
  Spinor4 left;
  Spinor4 right;
};

inline BranchLimits particle_limits(double p, const ScatterCoeffs &s) {
  const double q = p / (energy(p) + 1.0);
  return {{1.0 + s.R_particle, 0.0, 0.0, q - s.R_particle * q},
          {s.T_particle, 0.0, 0.0, s.T_particle * q}};
}

inline BranchLimits anti_limits(double p, const ScatterCoeffs &s) {
  const double q = p / (energy(p) + 1.0);
  return {{q - s.R_anti * q, 0.0, 0.0, 1.0 + s.R_anti}, {s.T_anti * q, 0.0, 0.0, s.T_anti}};
}

/// Closed-form point-detector solution for one prepared packet. The incoming state at
/// tau = 0 is the free packet on the detector's light-cone start plane; the reflected
/// part at tau = 0 is neglected.
class PointDetectorSolution {
 public:
  PointDetectorSolution(const PacketSpec &packet, const PointDetector &det, const PhysUnits &u = {})
      : packet_(packet, u), det_(det), origin_(light_cone_start(packet, det.position)) {
    det.validate();
    const auto &spec = packet_.spec();
    const double dy = origin_.x - spec.x0, ds = origin_.t - spec.t0;
    for (const auto &n : packet_.a_nodes()) {
      const auto sc = scatter_coefficients(n.p, det.kappa);
      a_.push_back({std::polar(n.weight * sc.T_particle, u.chi * (n.p * dy - n.energy * ds)), u.chi * n.energy});
    }
    for (const auto &n : packet_.b_nodes()) {
      const auto sc = scatter_coefficients(n.p, det.kappa);
      const double q = n.p / (n.energy + 1.0);
      b_.push_back({std::polar(n.weight * sc.T_anti * q, -u.chi * (n.p * dy - n.energy * ds)), u.chi * n.energy});
    }
  }

  TwoVector origin() const { return origin_; }
  const SpectralPacket &packet() const { return packet_; }

  /// First component of the transmitted wave at the detector, Omega_TRA,1(tau, 0).
  cplx transmitted_amplitude(double tau) const {
    cplx s = 0.0;
    for (const auto &n : a_) s += n.c * std::polar(1.0, -n.omega * tau);
    for (const auto &n : b_) s += n.c * std::polar(1.0, n.omega * tau);
    return s;
  }

  /// P(tau) proportional to |Omega_TRA,1(tau, 0)|^2, normalized over the grid.
  ArrivalDensity arrival_density(const std::vector<double> &tau_grid) const {
    if (tau_grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "arrival_density_point: tau grid too short");
    std::vector<double> d(tau_grid.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(transmitted_amplitude(tau_grid[i]));
    ArrivalDensity a = normalize_density(tau_grid, d, origin_.t);
    // Detection rate kappa |Omega_1(tau, 0)|^2 integrated over tau.
    a.P_inf = std::min(1.0, det_.kappa * a.P_inf);
    return a;
  }

 private:
  struct Mode {
    cplx c;
    double omega;
  };

  SpectralPacket packet_;
  PointDetector det_;
  TwoVector origin_;
  std::vector<Mode> a_;
  std::vector<Mode> b_;
};

inline cplx transmitted_amplitude(const PacketSpec &spec, double kappa, double tau, double detector_x = 0.0,
                                  const PhysUnits &u = {}) {
  return PointDetectorSolution(spec, PointDetector{kappa, detector_x}, u).transmitted_amplitude(tau);
}

inline ArrivalDensity arrival_density_point(const PacketSpec &spec, double kappa,
                                            const std::vector<double> &tau_grid, double detector_x = 0.0,
                                            const PhysUnits &u = {}) {
  return PointDetectorSolution(spec, PointDetector{kappa, detector_x}, u).arrival_density(tau_grid);
}

inline std::vector<double> uniform_tau_grid(double tau_max, double dtau) {
  const auto n = static_cast<std::size_t>(std::llround(tau_max / dtau)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) * dtau;
  return g;
}

}  // namespace rtoa
