#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rtoa/experiment.hpp"
#include "rtoa/propagator.hpp"
#include "rtoa/quadrature.hpp"

using namespace rtoa;

namespace {

// Small-chi setting in which the lattice resolves the Compton scale comfortably.
EvolutionConfig soft_config(double dx, double lo = -20.0, double hi = 20.0) {
  EvolutionConfig cfg;
  cfg.dtau = cfg.dx = dx;
  cfg.x_lo = lo;
  cfg.x_hi = hi;
  cfg.units.chi = 1.0;
  return cfg;
}

PlaneState soft_packet(const EvolutionConfig &cfg, double p0 = 0.75, double eta = 2.0) {
  return initial_packet(PacketSpec{p0, eta, 0.0, 0.0}, cfg.grid(), cfg.units);
}

// The prepared spinor also carries a left-moving negative-energy part, so the main
// packet is tracked by its peak rather than the centroid.
double peak(const PlaneState &s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (norm_sq(s.values[i]) > norm_sq(s.values[best])) best = i;
  return s.x(best);
}

}  // namespace

TEST(SpectralFreeEvolve, IdentityAndUnitarity) {
  std::mt19937_64 rng(1);
  const PlaneState s = oracle::random_state(rng, 256, 0.01);
  EXPECT_EQ(relative_l2(spectral_free_evolve(s, 0.0), s), 0.0);
  const double n0 = norm_sq(s);
  EXPECT_NEAR(norm_sq(spectral_free_evolve(s, 0.37)) / n0, 1.0, 1e-12);
}

TEST(SpectralFreeEvolve, MatchesDirectFourierOracle) {
  std::mt19937_64 rng(2);
  // Odd size: no Nyquist mode, whose momentum sign is a convention.
  const PlaneState s = oracle::random_state(rng, 97, 0.05);
  PhysUnits u;
  u.chi = 3.0;
  for (double mass : {1.0, 0.0}) {
    const PlaneState a = spectral_free_evolve(s, 0.8, u, mass);
    const PlaneState b = oracle::free_evolve_dft(s, 0.8, u.chi, mass);
    EXPECT_LT(relative_l2(a, b), 1e-12) << "mass = " << mass;
  }
}

TEST(SpectralFreeEvolve, MatchesSpacetimeQuadrature) {
  // Physical units: the FFT route against the Gauss-Legendre plane-wave sums.
  const PacketSpec spec;
  const SpectralPacket sp(spec);
  const PlaneState grid = make_grid(-3.0, 2.0, 0.002);
  const PlaneState start = sp.plane_state(-0.5, grid);
  const PlaneState evolved = spectral_free_evolve(start, 1.0);
  EXPECT_LT(relative_l2(evolved, sp.plane_state(0.5, grid)), 1e-9);
}

TEST(SpectralFreeEvolve, GroupVelocity) {
  const SpectralPacket sp(PacketSpec{});
  const PlaneState grid = make_grid(-3.0, 2.0, 0.001);
  const PlaneState s0 = sp.plane_state(0.0, grid);
  const double v = peak(spectral_free_evolve(s0, 1.0)) - peak(s0);
  EXPECT_NEAR(v / 0.6, 1.0, 0.005);
}

TEST(LightCone, MasslessStepIsExactShift) {
  std::mt19937_64 rng(4);
  PlaneState s = oracle::random_state(rng, 64, 0.01);
  // Right-moving chiral eigenstate: components 4 = 1 and 3 = 2.
  for (auto &v : s.values) {
    v[3] = v[0];
    v[2] = v[1];
  }
  for (std::size_t i = 60; i < 64; ++i) s.values[i] = {};
  const PlaneState before = s;
  EXPECT_EQ(free_dirac_step_inplace(s, 0.01, PhysUnits{}, 0.0), 0.0);
  for (std::size_t i = 1; i < 64; ++i)
    for (int c = 0; c < 4; ++c) EXPECT_LT(std::abs(s.values[i][c] - before.values[i - 1][c]), 1e-14);
  // Two steps on a generic state: right movers two sites right, left movers two sites left.
  PlaneState g = oracle::random_state(rng, 64, 0.01);
  const double n0 = norm_sq(g);
  double lost = free_dirac_step_inplace(g, 0.01, PhysUnits{}, 0.0);
  lost += free_dirac_step_inplace(g, 0.01, PhysUnits{}, 0.0);
  EXPECT_NEAR(norm_sq(g) + lost, n0, 1e-12);
}

TEST(LightCone, UnitaryWithMass) {
  std::mt19937_64 rng(6);
  PlaneState s = oracle::random_state(rng, 128, 0.002);
  for (std::size_t i = 0; i < 8; ++i) s.values[i] = s.values[127 - i] = {};
  const double n0 = norm_sq(s);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(free_dirac_step_inplace(s, 0.002), 0.0);
  EXPECT_NEAR(norm_sq(s), n0, 1e-12);
}

TEST(LightCone, PlaneWavePhasePerStep) {
  // A periodic plane wave e^{i chi p x} is mapped to the branch eigenvalue e^{-i Omega},
  // cos Omega = cos(chi p dx) cos(chi dtau); Omega - chi E dtau = O(dtau^3).
  const double chi = 1.0;
  const double p = 0.75;
  double prev = 0.0;
  for (double dtau : {0.02, 0.01, 0.005}) {
    const double omega = std::acos(std::cos(chi * p * dtau) * std::cos(chi * dtau));
    const double err = std::abs(omega - chi * energy(p) * dtau);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 8.0, 0.1);
    }
    prev = err;
  }
  // The lattice step realizes that eigenvalue on the positive-energy spinor.
  const double dtau = 0.01;
  const std::size_t n = 400;
  PhysUnits u;
  u.chi = chi;
  const double k = 2.0 * std::numbers::pi * 3.0 / (static_cast<double>(n) * dtau);
  const double pk = k / chi;
  const double omega = std::acos(std::cos(k * dtau) * std::cos(chi * dtau));
  PlaneState s(0.0, dtau, n);
  // Eigenvector of the one-step map (found from its 2x2 block on the (1,4) pair).
  const cplx phase_r = std::polar(1.0, -k * dtau), phase_l = std::polar(1.0, k * dtau);
  const cplx h = std::polar(1.0, -0.5 * chi * dtau);
  // M = D (1/2)[[r+l, r-l],[r-l, r+l]] D with D = diag(h, conj h).
  const cplx m11 = h * h * 0.5 * (phase_r + phase_l), m12 = 0.5 * (phase_r - phase_l);
  const cplx lambda = std::polar(1.0, -omega);
  const cplx ratio = (lambda - m11) / m12;  // component 4 / component 1
  for (std::size_t i = 0; i < n; ++i) {
    const cplx w = std::polar(1.0, k * s.x(i));
    s.values[i] = {w, 0.0, 0.0, ratio * w};
  }
  // Interior sites only; the absorbing edge removes the wrap-around neighbour.
  const PlaneState before = s;
  free_dirac_step_inplace(s, dtau, u);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    EXPECT_LT(std::abs(s.values[i][0] - lambda * before.values[i][0]), 1e-12);
    EXPECT_LT(std::abs(s.values[i][3] - lambda * before.values[i][3]), 1e-12);
  }
  EXPECT_LT(std::abs(omega - chi * energy(pk) * dtau), 1e-5);
}

TEST(LightCone, SecondOrderConvergence) {
  // Errors against the exact evolution shrink fourfold per halving of dx.
  const double tau = 2.0;
  std::vector<double> errs;
  for (double dx : {0.04, 0.02, 0.01}) {
    EvolutionConfig cfg = soft_config(dx);
    cfg.scheme = FreeScheme::LightCone;
    cfg.tau_max = tau;
    const PlaneState init = soft_packet(cfg);
    PlaneState s = init;
    const Stepper st(cfg, zero_field(cfg.grid()));
    for (std::size_t k = 0; k < cfg.steps(); ++k) st.step(s);
    errs.push_back(relative_l2(s, spectral_free_evolve(init, tau, cfg.units)));
  }
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.4);
  EXPECT_NEAR(errs[1] / errs[2], 4.0, 0.4);
}

TEST(StrangStep, ConstantRateDecay) {
  // Uniform upper-component state is a zero mode of the massless transport part.
  EvolutionConfig cfg = soft_config(0.01, -1.0, 1.0);
  cfg.mass = 0.0;
  const double r = 0.7;
  const PlaneState grid = cfg.grid();
  RateField f{grid.x_min, grid.dx, std::vector<double>(grid.size(), r)};
  PlaneState s = grid;
  for (auto &v : s.values) v = {1.0, cplx(0.0, 1.0), 0.0, 0.0};
  s = strang_step(s, f, cfg);
  const std::size_t mid = grid.size() / 2;
  EXPECT_NEAR(norm_sq(s.values[mid]) / 2.0, std::exp(-r * cfg.dtau), 1e-14);
}

TEST(StrangStep, SingleSiteNormBudget) {
  for (FreeScheme scheme : {FreeScheme::Spectral, FreeScheme::LightCone}) {
    EvolutionConfig cfg = soft_config(0.01, -1.0, 1.0);
    cfg.scheme = scheme;
    PlaneState s = cfg.grid();
    s.values[s.size() / 2] = {0.6, 0.0, 0.0, cplx(0.0, 0.8)};
    const double n0 = norm_sq(s);
    const double lost = Stepper(cfg, zero_field(s)).step(s);
    EXPECT_NEAR(norm_sq(s) + lost, n0, 1e-12);
  }
}

TEST(StrangStep, StaticPotentialPhase) {
  // A constant scalar potential only adds a global phase exp(-i chi A0 dtau).
  EvolutionConfig cfg = soft_config(0.05);
  const double a0 = 0.3;
  const PlaneState init = soft_packet(cfg);
  EvolutionConfig with = cfg;
  with.potential0 = [a0](double) { return a0; };
  const PlaneState a = strang_step(init, zero_field(init), with);
  const PlaneState b = scaled(strang_step(init, zero_field(init), cfg), std::polar(1.0, -cfg.units.chi * a0 * cfg.dtau));
  EXPECT_LT(relative_l2(a, b), 1e-12);
  // A vector potential keeps the evolution unitary.
  with.potential1 = [](double x) { return 0.1 * std::sin(x); };
  PlaneState s = init;
  const Stepper st(with, zero_field(init));
  for (int k = 0; k < 50; ++k) st.step(s);
  EXPECT_NEAR(norm_sq(s), norm_sq(init), 1e-10);
}

TEST(Evolve, UnitaryWithoutDetector) {
  const PacketSpec packet;
  EvolutionConfig cfg;
  cfg.dtau = cfg.dx = 0.002;
  cfg.x_lo = -5.0;
  cfg.x_hi = 2.0;
  cfg.tau_max = 2.0;
  const SpectralPacket sp(packet);
  const PlaneState init = prepare_plane_state(sp, light_cone_start(packet, 0.0).t, cfg);
  const auto rec = evolve(init, DetectorSpec{WindowDetector{0.0}}, cfg);
  for (double s : rec.survival) EXPECT_NEAR(s, 1.0, 1e-9);
  for (double d : rec.detection_density) EXPECT_EQ(d, 0.0);
}

TEST(Evolve, ProbabilityBudgetAndMonotoneSurvival) {
  const PacketSpec packet;
  EvolutionConfig cfg;
  cfg.dtau = cfg.dx = 0.002;
  cfg.x_lo = -5.0;
  cfg.x_hi = 2.0;
  cfg.tau_max = suggested_tau_max(packet, 0.0);
  const SpectralPacket sp(packet);
  const PlaneState init = prepare_plane_state(sp, light_cone_start(packet, 0.0).t, cfg);
  const auto rec = evolve(init, DetectorSpec{WindowDetector{}}, cfg);
  const auto cum = cumulative_trapezoid(rec.tau, rec.detection_density);
  double max_d = 0.0, mode = 0.0;
  for (std::size_t i = 0; i < rec.tau.size(); ++i) {
    EXPECT_LT(std::abs((1.0 - rec.survival[i] - rec.leakage[i]) - cum[i]), 1e-6);
    EXPECT_GE(rec.detection_density[i], 0.0);
    if (i > 0) {
      EXPECT_LE(rec.survival[i], rec.survival[i - 1] + 1e-13);
    }
    if (rec.detection_density[i] > max_d) {
      max_d = rec.detection_density[i];
      mode = rec.tau[i];
    }
  }
  EXPECT_GT(cum.back(), 0.0);
  EXPECT_TRUE(rec.tail_ok);
  // Proper-time origin is one light-crossing before the preparation: mode ~ 1 + 5/3.
  EXPECT_NEAR(mode, 1.0 + mechanics_time(0.75), 0.1);
}

TEST(Evolve, ErrorPaths) {
  EvolutionConfig cfg;
  cfg.dtau = cfg.dx = 0.002;
  cfg.x_lo = -2.0;
  cfg.x_hi = 0.5;
  cfg.tau_max = 0.1;
  PlaneState s = cfg.grid();
  try {
    evolve(s, DetectorSpec{WindowDetector{}}, cfg);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNormalized);
  }
  // A packet starting against the wall leaks more than the rejection threshold.
  const PlaneState wall = initial_packet(PacketSpec{-0.75, 0.1, -1.2}, cfg.grid());
  cfg.tau_max = 1.5;
  try {
    evolve(wall, DetectorSpec{WindowDetector{}}, cfg);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::LeakageExceeded);
  }
  EvolutionConfig bad = cfg;
  bad.dx = 0.001;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Evolve, TailCriterionFlagsShortRuns) {
  const PacketSpec packet;
  EvolutionConfig cfg;
  cfg.dtau = cfg.dx = 0.002;
  cfg.x_lo = -5.0;
  cfg.x_hi = 2.0;
  cfg.tau_max = 2.7;
  const SpectralPacket sp(packet);
  const PlaneState init = prepare_plane_state(sp, light_cone_start(packet, 0.0).t, cfg);
  const auto rec = evolve(init, DetectorSpec{WindowDetector{}}, cfg);
  EXPECT_FALSE(rec.tail_ok);
}
