#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/detector.hpp"
#include "rtoa/parallel.hpp"
#include "rtoa/propagator.hpp"
#include "rtoa/stats.hpp"

namespace rtoa {

// ---------------------------------------------------------------------------
// Events and their causal order

struct EventRecord {
  double tau = 0.0;
  TwoVector point;
  int label = 0;
};

struct OrderReport {
  bool ok = true;
  std::size_t first = 0;
  std::size_t second = 0;
  std::string message;
};

/// Checks that no event at a later proper time lies in the backward light cone of an
/// earlier one: for tau_i < tau_j, either the separation is spacelike or t_i < t_j.
inline OrderReport validate_event_order(const std::vector<EventRecord> &events) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].tau < events[i - 1].tau)
      throw Error(ErrorCode::Unsorted, "validate_event_order: events are not sorted by proper time");
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      if (!(events[i].tau < events[j].tau)) continue;
      const TwoVector d = events[j].point - events[i].point;
      const double n2 = minkowski_norm_sq(d);
      const bool ok = (n2 >= 0.0 && events[i].point.t < events[j].point.t) || n2 < 0.0;
      if (!ok) {
        return {false, i, j,
                "event " + std::to_string(j) + " lies in the backward light cone of event " + std::to_string(i)};
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Ideal (instantaneous) measurements

struct TotalState {
  int classical = 0;
  PlaneState quantum;
  double tau = 0.0;
};

/// Observable sum_j lambda_j |Phi_j><Phi_j| with orthonormal eigenvectors.
struct Observable {
  std::vector<std::pair<double, PlaneState>> eigen;

  void validate(double tol = 1e-10) const {
    if (eigen.empty()) throw Error(ErrorCode::InvalidArgument, "Observable: no eigenvectors");
    for (std::size_t j = 0; j < eigen.size(); ++j)
      for (std::size_t k = j; k < eigen.size(); ++k) {
        const cplx ip = inner_product(eigen[j].second, eigen[k].second);
        if (std::abs(ip - (j == k ? 1.0 : 0.0)) > tol)
          throw Error(ErrorCode::InvalidArgument, "Observable: eigenvectors are not orthonormal");
      }
  }
};

struct Measurement {
  double tau = 0.0;
  TwoVector point;
  Observable observable;
};

struct MeasurementOutcome {
  std::size_t index = 0;
  double eigenvalue = 0.0;
  TotalState state;
};

/// Sequence of ideal measurements. Between measurements nothing evolves; at each one an
/// outcome j is drawn with probability |<Phi_j|Psi>|^2 and the state collapses to Phi_j.
inline std::vector<MeasurementOutcome> ideal_measurement_run(const TotalState &initial,
                                                             const std::vector<Measurement> &plan,
                                                             TrajectoryRng &rng) {
  if (std::abs(norm_sq(initial.quantum) - 1.0) > 1e-9)
    throw Error(ErrorCode::NotNormalized, "ideal_measurement_run: initial state must have unit norm");
  std::vector<EventRecord> events;
  double last = initial.tau;
  for (const auto &m : plan) {
    if (!(m.tau > last)) throw Error(ErrorCode::Unsorted, "ideal_measurement_run: proper times must increase");
    last = m.tau;
    events.push_back({m.tau, m.point, 0});
  }
  if (const auto rep = validate_event_order(events); !rep.ok) throw Error(ErrorCode::OrderViolation, rep.message);

  std::vector<MeasurementOutcome> out;
  TotalState state = initial;
  for (const auto &m : plan) {
    m.observable.validate();
    std::vector<double> prob;
    double total = 0.0;
    for (const auto &[lambda, phi] : m.observable.eigen) {
      prob.push_back(std::norm(inner_product(phi, state.quantum)));
      total += prob.back();
    }
    if (std::abs(total - 1.0) > 1e-8)
      throw Error(ErrorCode::InvalidArgument, "ideal_measurement_run: eigenvectors do not span the state");
    const double r = rng.uniform() * total;
    std::size_t j = 0;
    for (double acc = prob[0]; j + 1 < prob.size() && r >= acc; acc += prob[++j]) {
    }
    state.quantum = m.observable.eigen[j].second;
    state.classical = static_cast<int>(j);
    state.tau = m.tau;
    out.push_back({j, m.observable.eigen[j].first, state});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuous detection

/// One detector of the continuous algorithm: a rate field on the shared lattice and the
/// start of its (resting) path, z(tau) = (start.t + tau, start.x).
struct DetectorChannel {
  RateField field;
  TwoVector start;

  TwoVector at(double tau) const { return {start.t + tau, start.x}; }
};

/// Builds a channel whose path begins on the backward light cone of `preparation`.
inline DetectorChannel make_channel(const WindowDetector &det, TwoVector preparation, const PlaneState &grid,
                                    const PhysUnits &u = {}) {
  return {lambda_field(DetectorSpec{det}, grid, u),
          {preparation.t - std::abs(det.position - preparation.x), det.position}};
}

struct DetectionRecord {
  bool detected = false;
  int detector_index = -1;
  double tau_detect = 0.0;
  TwoVector point;
  std::vector<double> tau;
  std::vector<double> survival;
  PlaneState post_jump_state;
};

/// p_k = <G_k psi|G_k psi> / sum_j <G_j psi|G_j psi>.
inline std::vector<double> detector_choice_probs(const PlaneState &state, const std::vector<DetectorChannel> &channels) {
  std::vector<double> w;
  double total = 0.0;
  for (const auto &c : channels) {
    w.push_back(expectation(c.field, state));
    total += w.back();
  }
  if (!(total > 0.0)) throw Error(ErrorCode::NoCoupling, "detector_choice_probs: no channel couples to the state");
  for (double &v : w) v /= total;
  return w;
}

namespace detail {

inline void check_channels(const std::vector<DetectorChannel> &channels, TwoVector preparation) {
  if (channels.empty()) throw Error(ErrorCode::InvalidArgument, "pdp: no detector channels");
  for (const auto &c : channels) {
    const double n2 = minkowski_norm_sq(preparation - c.start);
    if (std::abs(n2) > 1e-9 || c.start.t > preparation.t)
      throw Error(ErrorCode::InvalidArgument, "pdp: detector paths must start on the backward light cone of the preparation");
    // All channels act on one plane family, which requires a common start time.
    if (std::abs(c.start.t - channels.front().start.t) > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "pdp: detector paths must share the light-cone start time");
  }
}

inline RateField total_field(const std::vector<DetectorChannel> &channels) {
  RateField f = channels.front().field;
  for (std::size_t k = 1; k < channels.size(); ++k) {
    if (channels[k].field.rate.size() != f.rate.size())
      throw Error(ErrorCode::GridMismatch, "pdp: channel fields differ in size");
    for (std::size_t i = 0; i < f.rate.size(); ++i) f.rate[i] += channels[k].field.rate[i];
  }
  return f;
}

inline std::size_t pick(const std::vector<double> &prob, double r) {
  std::size_t k = 0;
  double acc = prob[0];
  while (k + 1 < prob.size() && r >= acc) acc += prob[++k];
  return k;
}

// G_k psi / ||G_k psi||, with G_k = sqrt(Lambda_k) on the upper components.
inline PlaneState collapse(const PlaneState &state, const RateField &field) {
  PlaneState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = std::sqrt(field.rate[i]);
    out.values[i] = {g * state.values[i][0], g * state.values[i][1], 0.0, 0.0};
  }
  const double n = std::sqrt(norm_sq(out));
  if (!(n > 0.0)) throw Error(ErrorCode::NoCoupling, "collapse: detector does not couple to the state");
  return scaled(std::move(out), 1.0 / n);
}

}  // namespace detail

/// One trajectory of the continuous detection algorithm: draw r, integrate the absorbing
/// evolution until the absorbed probability reaches r (linear interpolation inside the
/// bracketing step), choose a detector with probability proportional to <G_k psi|G_k psi>
/// and collapse. Trajectories still undetected at cfg.tau_max are reported as such.
inline DetectionRecord pdp_sample(const PlaneState &initial, const std::vector<DetectorChannel> &channels,
                                  TwoVector preparation, const EvolutionConfig &cfg, TrajectoryRng &rng) {
  detail::check_channels(channels, preparation);
  if (std::abs(norm_sq(initial) - 1.0) > 1e-6) throw Error(ErrorCode::NotNormalized, "pdp_sample: initial state must be normalized");
  const Stepper stepper(cfg, detail::total_field(channels));
  const double r = rng.uniform();

  DetectionRecord rec;
  PlaneState state = initial;
  double leaked = 0.0;
  double absorbed_prev = 0.0;
  std::vector<double> w_prev;
  for (const auto &c : channels) w_prev.push_back(expectation(c.field, state));
  rec.tau.push_back(0.0);
  rec.survival.push_back(norm_sq(state));
  const std::size_t steps = cfg.steps();
  for (std::size_t k = 1; k <= steps; ++k) {
    leaked += stepper.step(state);
    const double s = norm_sq(state);
    const double tau = static_cast<double>(k) * cfg.dtau;
    rec.tau.push_back(tau);
    rec.survival.push_back(s);
    const double absorbed = 1.0 - s - leaked;
    std::vector<double> w_now;
    for (const auto &c : channels) w_now.push_back(expectation(c.field, state));
    if (absorbed >= r) {
      const double f = (r - absorbed_prev) / (absorbed - absorbed_prev);
      rec.detected = true;
      rec.tau_detect = static_cast<double>(k - 1) * cfg.dtau + f * cfg.dtau;
      std::vector<double> w(channels.size());
      double total = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) total += (w[j] = w_prev[j] + f * (w_now[j] - w_prev[j]));
      if (!(total > 0.0)) throw Error(ErrorCode::NoCoupling, "pdp_sample: jump without coupling");
      for (double &v : w) v /= total;
      const std::size_t l = detail::pick(w, rng.uniform());
      rec.detector_index = static_cast<int>(l);
      rec.point = channels[l].at(rec.tau_detect);
      rec.post_jump_state = detail::collapse(state, channels[l].field);
      return rec;
    }
    absorbed_prev = absorbed;
    w_prev = std::move(w_now);
  }
  if (leaked > kLeakageReject)
    throw Error(ErrorCode::LeakageExceeded, "pdp_sample: wall leakage " + std::to_string(leaked) + " exceeds 1e-3");
  return rec;
}

/// Compact outcome of one trajectory.
struct TrajectoryOutcome {
  bool detected = false;
  int channel = -1;
  double tau = 0.0;
  TwoVector point;
};

/// Ensemble of independent trajectories. The no-jump evolution is the same for every
/// trajectory until its jump, so it is integrated once; each trajectory then consumes
/// the same random draws as pdp_sample and yields the identical outcome.
struct PdpEnsemble {
  std::vector<double> tau;
  std::vector<double> absorbed;                // 1 - S - wall leakage
  std::vector<double> density;                 // <psi|Lambda psi>
  std::vector<std::vector<double>> weights;    // per step, per channel <G_k psi|G_k psi>
  std::vector<TrajectoryOutcome> outcomes;

  std::size_t detected_count() const {
    return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(),
                                                  [](const auto &o) { return o.detected; }));
  }
  double absorbed_total() const { return absorbed.back(); }
};

inline PdpEnsemble pdp_ensemble(const PlaneState &initial, const std::vector<DetectorChannel> &channels,
                                TwoVector preparation, const EvolutionConfig &cfg, std::size_t trajectories,
                                std::uint64_t seed, unsigned threads = 0) {
  detail::check_channels(channels, preparation);
  if (std::abs(norm_sq(initial) - 1.0) > 1e-6) throw Error(ErrorCode::NotNormalized, "pdp_ensemble: initial state must be normalized");
  const RateField total = detail::total_field(channels);
  const Stepper stepper(cfg, total);
  PdpEnsemble ens;
  PlaneState state = initial;
  double leaked = 0.0;
  auto sample = [&](double tau) {
    ens.tau.push_back(tau);
    ens.absorbed.push_back(1.0 - norm_sq(state) - leaked);
    ens.density.push_back(expectation(total, state));
    std::vector<double> w;
    for (const auto &c : channels) w.push_back(expectation(c.field, state));
    ens.weights.push_back(std::move(w));
  };
  sample(0.0);
  ens.absorbed[0] = 0.0;
  const std::size_t steps = cfg.steps();
  for (std::size_t k = 1; k <= steps; ++k) {
    leaked += stepper.step(state);
    sample(static_cast<double>(k) * cfg.dtau);
  }
  if (leaked > kLeakageReject)
    throw Error(ErrorCode::LeakageExceeded, "pdp_ensemble: wall leakage " + std::to_string(leaked) + " exceeds 1e-3");

  ens.outcomes.resize(trajectories);
  parallel_for(trajectories, threads, [&](std::size_t i) {
    TrajectoryRng rng(seed, i);
    const double r = rng.uniform();
    // First step whose absorbed probability reaches r. `absorbed` is non-decreasing up
    // to rounding, and pdp_sample scans forward, so scan forward here as well.
    std::size_t k = 1;
    while (k < ens.absorbed.size() && ens.absorbed[k] < r) ++k;
    TrajectoryOutcome o;
    if (k < ens.absorbed.size()) {
      const double a0 = (k == 1) ? 0.0 : ens.absorbed[k - 1];
      const double f = (r - a0) / (ens.absorbed[k] - a0);
      o.detected = true;
      o.tau = ens.tau[k - 1] + f * cfg.dtau;
      std::vector<double> w(channels.size());
      double sum = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j)
        sum += (w[j] = ens.weights[k - 1][j] + f * (ens.weights[k][j] - ens.weights[k - 1][j]));
      for (double &v : w) v /= sum;
      const std::size_t l = detail::pick(w, rng.uniform());
      o.channel = static_cast<int>(l);
      o.point = channels[l].at(o.tau);
    }
    ens.outcomes[i] = o;
  });
  return ens;
}

}  // namespace rtoa
