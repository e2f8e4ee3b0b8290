#pragma once

#include <cmath>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/propagator.hpp"
#include "rtoa/quadrature.hpp"

namespace rtoa {

/// Normalized proper-time-of-arrival density P(tau).
struct ArrivalDensity {
  std::vector<double> tau;  // Angstrom/c
  std::vector<double> P;    // 1/(Angstrom/c), integrates to one
  double P_inf = 0.0;       // total detection probability
  /// Lab time of tau = 0 in the detector rest frame (x0/c for the standard geometry,
  /// where the detector path starts on the backward light cone of the preparation).
  double lab_offset = 0.0;
};

/// Density over coordinate time in some frame.
struct TimeDensity {
  std::vector<double> t;
  std::vector<double> p;
};

inline ArrivalDensity normalize_density(const std::vector<double> &tau, const std::vector<double> &d,
                                        double lab_offset) {
  const double total = trapezoid(tau, d);
  if (!(total > 0.0)) throw Error(ErrorCode::NoDetection, "normalize_density: no detection probability");
  ArrivalDensity a{tau, d, total, lab_offset};
  for (double &v : a.P) v /= total;
  return a;
}

inline ArrivalDensity normalize_density(const EvolutionRecord &rec, double lab_offset) {
  return normalize_density(rec.tau, rec.detection_density, lab_offset);
}

/// p(t) = P(t - offset): the tau axis shifted to lab time.
inline TimeDensity lab_density(const ArrivalDensity &a) {
  TimeDensity d{a.tau, a.P};
  for (double &t : d.t) t += a.lab_offset;
  return d;
}

inline double expected_time(const TimeDensity &d) {
  std::vector<double> tp(d.t.size());
  for (std::size_t i = 0; i < tp.size(); ++i) tp[i] = d.t[i] * d.p[i];
  return trapezoid(d.t, tp);
}

/// Lab expectation T = int tau P dtau + offset.
inline double expected_time(const ArrivalDensity &a) {
  std::vector<double> tp(a.tau.size());
  for (std::size_t i = 0; i < tp.size(); ++i) tp[i] = a.tau[i] * a.P[i];
  return trapezoid(a.tau, tp) + a.lab_offset;
}

inline double total_mass(const TimeDensity &d) { return trapezoid(d.t, d.p); }

/// Density seen from a frame moving with velocity v relative to the detector:
/// p~(t~) = sqrt(1 - v^2) p(sqrt(1 - v^2) t~).
inline TimeDensity boost_density(const TimeDensity &d, double v) {
  const double g = lorentz_gamma(v);
  TimeDensity out = d;
  for (double &t : out.t) t *= g;
  for (double &p : out.p) p /= g;
  return out;
}

inline double boost_expectation(double T, double v) { return T * lorentz_gamma(v); }

/// Classical flight time over `distance` for momentum p0 (mc): distance * sqrt(1 + 1/p0^2).
inline double mechanics_time(double p0, double distance = 1.0) {
  if (!(p0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mechanics_time: p0 must be positive");
  return distance * std::sqrt(1.0 + 1.0 / (p0 * p0));
}

/// |1/(lambda - 1)| |T(lambda dtau) - T(dtau)|.
inline double richardson_error(double t_coarse, double t_fine, double lambda) {
  if (lambda == 1.0) throw Error(ErrorCode::InvalidArgument, "richardson_error: lambda must differ from 1");
  return std::abs(1.0 / (lambda - 1.0)) * std::abs(t_coarse - t_fine);
}

/// Probability of t < 0; the interval containing t = 0 is split by linear interpolation.
inline double negative_time_mass(const TimeDensity &d) {
  double m = 0.0;
  for (std::size_t i = 1; i < d.t.size(); ++i) {
    const double a = d.t[i - 1], b = d.t[i];
    if (a >= 0.0) break;
    if (b <= 0.0) {
      m += 0.5 * (b - a) * (d.p[i - 1] + d.p[i]);
    } else {
      const double p0 = d.p[i - 1] + (d.p[i] - d.p[i - 1]) * (-a) / (b - a);
      m += 0.5 * (-a) * (d.p[i - 1] + p0);
    }
  }
  return m;
}

}  // namespace rtoa
