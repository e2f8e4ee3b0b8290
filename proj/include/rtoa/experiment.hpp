#pragma once

#include <cmath>

#include "rtoa/arrival.hpp"
#include "rtoa/core.hpp"
#include "rtoa/detector.hpp"
#include "rtoa/propagator.hpp"
#include "rtoa/wavepacket.hpp"

namespace rtoa {

/// Start of a resting detector's path at x_D: the point on the backward light cone of
/// the preparation event, z(0) = (t0 - |x_D - x0|, x_D).
inline TwoVector light_cone_start(const PacketSpec &packet, double detector_x) {
  return {packet.t0 - std::abs(detector_x - packet.x0), detector_x};
}

/// Proper-time window long enough for the detection density to decay below 1e-6 of its
/// peak: light-cone offset + classical flight time + 8 arrival-time widths.
inline double suggested_tau_max(const PacketSpec &packet, double detector_x, const PhysUnits &u = {}) {
  const double dist = std::abs(detector_x - packet.x0);
  const double p = std::abs(packet.p0);
  const double e = energy(p);
  const double v = p / e;
  const double t_flight = dist / v;
  // Spatial width at arrival, including dispersion of the group velocity.
  const double sigma_v = momentum_sigma(packet, u) / (e * e * e);
  const double sigma_x = std::hypot(packet.eta, sigma_v * t_flight);
  return dist + t_flight + 8.0 * sigma_x / v;
}

/// State on the plane of lab time `t`, sampled on the configured grid.
inline PlaneState prepare_plane_state(const SpectralPacket &packet, double t, const EvolutionConfig &cfg) {
  return packet.plane_state(t, cfg.grid());
}

struct ArrivalResult {
  EvolutionRecord record;
  ArrivalDensity density;
  double expected_time = 0.0;      // lab frame of the detector
  double negative_time_mass = 0.0;
};

/// Full time-of-arrival simulation for a resting window detector.
inline ArrivalResult simulate_arrival(const PacketSpec &packet, const WindowDetector &det,
                                      const EvolutionConfig &cfg) {
  const SpectralPacket sp(packet, cfg.units);
  const TwoVector start = light_cone_start(packet, det.position);
  const PlaneState initial = prepare_plane_state(sp, start.t, cfg);
  ArrivalResult r;
  r.record = evolve(initial, DetectorSpec{det}, cfg);
  r.density = normalize_density(r.record, start.t);
  r.expected_time = expected_time(r.density);
  r.negative_time_mass = negative_time_mass(lab_density(r.density));
  return r;
}

}  // namespace rtoa
