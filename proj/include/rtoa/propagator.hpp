#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "rtoa/core.hpp"
#include "rtoa/detector.hpp"
#include "rtoa/fft.hpp"
#include "rtoa/quadrature.hpp"

namespace rtoa {

/// How the free Dirac factor exp(-i dtau H0) of each split step is evaluated.
enum class FreeScheme {
  /// Exact per-mode propagator in Fourier space (periodic embedding).
  Spectral,
  /// Light-cone lattice: exact one-site chiral shifts, Strang-split mass rotation.
  LightCone,
};

struct EvolutionConfig {
  double dtau = 0.001;  // Angstrom/c
  double dx = 0.001;    // Angstrom, equal to dtau
  double x_lo = -6.0;
  double x_hi = 4.0;
  double tau_max = 3.0;
  FreeScheme scheme = FreeScheme::Spectral;
  /// Optional static potentials in mc^2 (A^0 scalar, A^1 vector part), as functions of x.
  std::function<double(double)> potential0;
  std::function<double(double)> potential1;
  PhysUnits units{};
  /// Particle mass in units of m; 0 gives the massless (pure transport) equation.
  double mass = 1.0;

  void validate() const {
    if (!(dtau > 0.0) || !(dx > 0.0)) throw Error(ErrorCode::InvalidArgument, "step sizes must be positive");
    if (std::abs(dx - dtau) > 1e-12 * dtau)
      throw Error(ErrorCode::InvalidArgument, "light-cone lattice requires dx == dtau");
    if (!(x_hi > x_lo)) throw Error(ErrorCode::InvalidArgument, "empty domain");
    if (!(tau_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_max must be positive");
    if (!(mass >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be >= 0");
  }

  PlaneState grid() const { return make_grid(x_lo, x_hi, dx); }
  std::size_t steps() const { return static_cast<std::size_t>(std::llround(tau_max / dtau)); }
};

struct EvolutionRecord {
  std::vector<double> tau;
  std::vector<double> detection_density;  // d(tau) = <psi|Lambda psi>
  std::vector<double> survival;           // S(tau) = <psi|psi>
  std::vector<double> leakage;            // cumulative norm lost through the walls
  PlaneState final_state;
  bool tail_ok = true;  // d(tau_max) < 1e-6 max d
  std::vector<std::string> warnings;

  double boundary_leakage() const { return leakage.empty() ? 0.0 : leakage.back(); }
};

inline constexpr double kLeakageWarn = 1e-6;
inline constexpr double kLeakageReject = 1e-3;
inline constexpr double kTailRatio = 1e-6;

/// Exact free Dirac evolution by `tau` on the periodic embedding of the grid.
/// Per Fourier mode, exp(-i chi tau (p alpha + m beta)) = cos(chi E tau) - i sin(chi E tau) H/E.
inline PlaneState spectral_free_evolve(const PlaneState &state, double tau, const PhysUnits &u = {},
                                       double mass = 1.0) {
  PlaneState out = state;
  if (tau == 0.0) return out;
  const std::size_t n = state.size();
  SpinorFft fft(n);
  for (int c = 0; c < 4; ++c) fft.forward(out.values, c);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = fft_wavenumber(j, n, state.dx) / u.chi;
    const double e = std::hypot(p, mass);
    const double c = std::cos(u.chi * e * tau);
    const double s = e > 0.0 ? std::sin(u.chi * e * tau) / e : u.chi * tau;
    auto &v = out.values[j];
    // H couples (1,4) and (2,3) with the same 2x2 block [[m, p], [p, -m]].
    auto rotate = [&](cplx &up, cplx &lo) {
      const cplx a = up, b = lo;
      up = (cplx{c, -s * mass} * a + cplx{0.0, -s * p} * b) * inv_n;
      lo = (cplx{0.0, -s * p} * a + cplx{c, s * mass} * b) * inv_n;
    };
    rotate(v[0], v[3]);
    rotate(v[1], v[2]);
  }
  for (int c = 0; c < 4; ++c) fft.backward(out.values, c);
  return out;
}

/// One light-cone step: half mass rotation, exact chiral shifts by one site, half mass
/// rotation. Right movers are the +1 eigenvectors of gamma0 gamma1 ((1,4) and (2,3)
/// symmetric combinations). Returns the norm carried out through the walls.
inline double free_dirac_step_inplace(PlaneState &state, double dtau, const PhysUnits &u = {},
                                      double mass = 1.0) {
  const cplx half_up = std::polar(1.0, -0.5 * mass * u.chi * dtau);
  const cplx half_lo = std::conj(half_up);
  auto rotate = [&](Spinor4 &v) {
    v[0] *= half_up;
    v[1] *= half_up;
    v[2] *= half_lo;
    v[3] *= half_lo;
  };
  auto &vals = state.values;
  const std::size_t n = vals.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "light-cone step needs at least two sites");
  const double r2 = std::numbers::sqrt2 / 2.0;
  std::vector<std::array<cplx, 2>> right(n), left(n);
  for (std::size_t i = 0; i < n; ++i) {
    rotate(vals[i]);
    right[i] = {r2 * (vals[i][0] + vals[i][3]), r2 * (vals[i][1] + vals[i][2])};
    left[i] = {r2 * (vals[i][0] - vals[i][3]), r2 * (vals[i][1] - vals[i][2])};
  }
  const double lost = (std::norm(right[n - 1][0]) + std::norm(right[n - 1][1]) +
                       std::norm(left[0][0]) + std::norm(left[0][1])) *
                      state.dx;
  const std::array<cplx, 2> none{};
  for (std::size_t i = 0; i < n; ++i) {
    // Right movers arrive from site i - 1, left movers from site i + 1.
    const auto &r = i > 0 ? right[i - 1] : none;
    const auto &l = i + 1 < n ? left[i + 1] : none;
    vals[i] = {r2 * (r[0] + l[0]), r2 * (r[1] + l[1]), r2 * (r[1] - l[1]), r2 * (r[0] - l[0])};
    rotate(vals[i]);
  }
  return lost;
}

inline PlaneState free_dirac_step(PlaneState state, const EvolutionConfig &cfg) {
  cfg.validate();
  free_dirac_step_inplace(state, cfg.dtau, cfg.units, cfg.mass);
  return state;
}

/// Split-step integrator for i d/dtau psi = (H0 + A^0 - A^1 alpha) psi - (i/2) Lambda psi:
/// the absorption factor exp(-dtau Lambda / 2) is split into two half-stages around
/// exp(-i dtau H0), so the norm decays by exp(-Lambda dtau) per step. The potential
/// phase is split symmetrically into the same pointwise stages.
class Stepper {
 public:
  Stepper(const EvolutionConfig &cfg, RateField lambda) : cfg_(cfg), lambda_(std::move(lambda)) {
    cfg_.validate();
    grid_ = cfg_.grid();
    if (lambda_.rate.empty()) lambda_ = RateField{grid_.x_min, grid_.dx, std::vector<double>(grid_.size(), 0.0)};
    if (lambda_.rate.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "Stepper: rate field does not match the grid");
    const std::size_t n = grid_.size();
    half_decay_.resize(n);
    for (std::size_t i = 0; i < n; ++i) half_decay_[i] = std::exp(-0.25 * cfg_.dtau * lambda_.rate[i]);
    if (cfg_.potential0 || cfg_.potential1) {
      pot_phase_.resize(n);
      pot_mix_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_.x(i);
        const double a0 = cfg_.potential0 ? cfg_.potential0(x) : 0.0;
        const double a1 = cfg_.potential1 ? cfg_.potential1(x) : 0.0;
        pot_phase_[i] = std::polar(1.0, -0.5 * cfg_.dtau * cfg_.units.chi * a0);
        pot_mix_[i] = 0.5 * cfg_.dtau * cfg_.units.chi * a1;
      }
    }
    if (cfg_.scheme == FreeScheme::Spectral) {
      fft_ = std::make_unique<SpinorFft>(n);
      mode_c_.resize(n);
      mode_s_.resize(n);
      mode_sp_.resize(n);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double p = fft_wavenumber(j, n, grid_.dx) / cfg_.units.chi;
        const double e = std::hypot(p, cfg_.mass);
        const double th = cfg_.units.chi * e * cfg_.dtau;
        const double s = e > 0.0 ? std::sin(th) / e : cfg_.units.chi * cfg_.dtau;
        mode_c_[j] = std::cos(th) * inv_n;
        mode_s_[j] = s * cfg_.mass * inv_n;
        mode_sp_[j] = s * p * inv_n;
      }
    }
  }

  const EvolutionConfig &config() const { return cfg_; }
  const PlaneState &grid() const { return grid_; }
  const RateField &rates() const { return lambda_; }

  /// Advances `state` by one dtau. Returns the norm removed at the walls.
  double step(PlaneState &state) const {
    if (!state.same_grid(grid_)) throw Error(ErrorCode::GridMismatch, "Stepper: state is not on the configured grid");
    pointwise(state);
    double lost = 0.0;
    if (cfg_.scheme == FreeScheme::Spectral) {
      spectral(state);
      lost = absorb_walls(state);
    } else {
      lost = free_dirac_step_inplace(state, cfg_.dtau, cfg_.units, cfg_.mass);
    }
    pointwise(state);
    return lost;
  }

  static constexpr std::size_t kWallCells = 8;

 private:
  void pointwise(PlaneState &state) const {
    auto &v = state.values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double f = half_decay_[i];
      if (f != 1.0) {
        v[i][0] *= f;
        v[i][1] *= f;
      }
    }
    if (pot_phase_.empty()) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
      // exp(-i h (A0 - A1 alpha)) on each (1,4)/(2,3) pair.
      const double c = std::cos(pot_mix_[i]), s = std::sin(pot_mix_[i]);
      auto mix = [&](cplx &a, cplx &b) {
        const cplx x = a, y = b;
        a = pot_phase_[i] * (c * x + cplx{0.0, s} * y);
        b = pot_phase_[i] * (cplx{0.0, s} * x + c * y);
      };
      mix(v[i][0], v[i][3]);
      mix(v[i][1], v[i][2]);
    }
  }

  void spectral(PlaneState &state) const {
    auto &v = state.values;
    const bool pair14 = any_nonzero(v, 0, 3), pair23 = any_nonzero(v, 1, 2);
    if (pair14) {
      fft_->forward(v, 0);
      fft_->forward(v, 3);
    }
    if (pair23) {
      fft_->forward(v, 1);
      fft_->forward(v, 2);
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double c = mode_c_[j], s = mode_s_[j], sp = mode_sp_[j];
      auto rotate = [&](cplx &up, cplx &lo) {
        const cplx a = up, b = lo;
        up = cplx{c, -s} * a + cplx{0.0, -sp} * b;
        lo = cplx{0.0, -sp} * a + cplx{c, s} * b;
      };
      if (pair14) rotate(v[j][0], v[j][3]);
      if (pair23) rotate(v[j][1], v[j][2]);
    }
    if (pair14) {
      fft_->backward(v, 0);
      fft_->backward(v, 3);
    }
    if (pair23) {
      fft_->backward(v, 1);
      fft_->backward(v, 2);
    }
  }

  // Zero-spinor strips at both walls; whatever reaches them leaves the domain.
  double absorb_walls(PlaneState &state) const {
    auto &v = state.values;
    const std::size_t n = v.size();
    const std::size_t w = std::min(kWallCells, n / 4);
    double lost = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      lost += norm_sq(v[i]) + norm_sq(v[n - 1 - i]);
      v[i] = {};
      v[n - 1 - i] = {};
    }
    return lost * state.dx;
  }

  static bool any_nonzero(const std::vector<Spinor4> &v, int a, int b) {
    for (const auto &s : v)
      if (s[a] != cplx{} || s[b] != cplx{}) return true;
    return false;
  }

  EvolutionConfig cfg_;
  RateField lambda_;
  PlaneState grid_;
  std::vector<double> half_decay_;
  std::vector<cplx> pot_phase_;
  std::vector<double> pot_mix_;
  std::unique_ptr<SpinorFft> fft_;
  std::vector<double> mode_c_, mode_s_, mode_sp_;
};

inline PlaneState strang_step(PlaneState state, const RateField &lambda, const EvolutionConfig &cfg) {
  Stepper(cfg, lambda).step(state);
  return state;
}

inline RateField zero_field(const PlaneState &grid) {
  return RateField{grid.x_min, grid.dx, std::vector<double>(grid.size(), 0.0)};
}

/// Absorbing evolution from tau = 0 to cfg.tau_max, sampling d(tau) and S(tau) every step.
inline EvolutionRecord evolve(const PlaneState &initial, const RateField &lambda,
                              const EvolutionConfig &cfg) {
  Stepper stepper(cfg, lambda);
  PlaneState state = initial;
  if (!state.same_grid(stepper.grid())) throw Error(ErrorCode::GridMismatch, "evolve: initial state is not on the configured grid");
  const double n0 = norm_sq(state);
  if (std::abs(n0 - 1.0) > 1e-6)
    throw Error(ErrorCode::NotNormalized, "evolve: initial state must be normalized, norm^2 = " + std::to_string(n0));

  const std::size_t steps = cfg.steps();
  EvolutionRecord rec;
  rec.tau.reserve(steps + 1);
  rec.detection_density.reserve(steps + 1);
  rec.survival.reserve(steps + 1);
  rec.leakage.reserve(steps + 1);
  double leaked = 0.0;
  auto sample = [&](double tau) {
    rec.tau.push_back(tau);
    rec.detection_density.push_back(expectation(stepper.rates(), state));
    rec.survival.push_back(norm_sq(state));
    rec.leakage.push_back(leaked);
  };
  sample(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    leaked += stepper.step(state);
    sample(static_cast<double>(k) * cfg.dtau);
    if (leaked > kLeakageReject)
      throw Error(ErrorCode::LeakageExceeded, "evolve: wall leakage " + std::to_string(leaked) +
                                                  " exceeds 1e-3 at tau = " + std::to_string(rec.tau.back()) +
                                                  "; enlarge the domain");
  }
  if (leaked > kLeakageWarn) rec.warnings.push_back("wall leakage " + std::to_string(leaked) + " exceeds 1e-6");
  double dmax = 0.0;
  for (double d : rec.detection_density) dmax = std::max(dmax, d);
  rec.tail_ok = dmax == 0.0 || rec.detection_density.back() < kTailRatio * dmax;
  if (!rec.tail_ok) rec.warnings.push_back("detection density not decayed at tau_max");
  rec.final_state = std::move(state);
  return rec;
}

inline EvolutionRecord evolve(const PlaneState &initial, const DetectorSpec &det, const EvolutionConfig &cfg) {
  return evolve(initial, lambda_field(det, initial, cfg.units), cfg);
}

}  // namespace rtoa
