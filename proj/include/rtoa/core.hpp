#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtoa {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

enum class ErrorCode {
  InvalidVelocity,
  InvalidArgument,
  GridMismatch,
  GridTooNarrow,
  UnderResolved,
  NotNormalized,
  NoDetection,
  NoCoupling,
  OrderViolation,
  Unsorted,
  LeakageExceeded,
  QuadratureFailure,
  Io,
};

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Internal unit system: lengths in Angstrom, times in Angstrom/c, momenta in mc,
/// energies in mc^2. `chi` = m c (1 Angstrom) / hbar converts a length in Angstrom
/// into multiples of the reduced Compton wavelength, so a plane wave of momentum p
/// reads exp(i chi p x) and a rate W (in mc^2) becomes W chi per (Angstrom/c).
struct PhysUnits {
  /// CODATA 2018 reduced Compton wavelength of the electron in Angstrom.
  static constexpr double kReducedComptonAngstrom = 3.8615926796e-3;

  double chi = 1.0 / kReducedComptonAngstrom;

  static PhysUnits electron() { return {}; }
};

struct TwoVector {
  double t = 0.0;  // Angstrom/c
  double x = 0.0;  // Angstrom
};

inline TwoVector operator-(TwoVector a, TwoVector b) { return {a.t - b.t, a.x - b.x}; }

/// Free-particle energy in mc^2 for momentum p in mc.
inline double energy(double p) { return std::sqrt(p * p + 1.0); }

/// t^2 - x^2 (signature +,-).
inline double minkowski_norm_sq(TwoVector d) { return d.t * d.t - d.x * d.x; }

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra

using Spinor4 = std::array<cplx, 4>;
using Mat4 = std::array<std::array<cplx, 4>, 4>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat4 operator*(const Mat4 &a, const Mat4 &b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat4 operator+(const Mat4 &a, const Mat4 &b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) c[i][j] = a[i][j] + b[i][j];
  return c;
}

inline Mat4 operator*(cplx s, const Mat4 &a) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) c[i][j] = s * a[i][j];
  return c;
}

inline Spinor4 operator*(const Mat4 &a, const Spinor4 &v) {
  Spinor4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += a[i][j] * v[j];
  return r;
}

inline double max_abs_diff(const Mat4 &a, const Mat4 &b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline Mat2 operator*(const Mat2 &a, const Mat2 &b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline cplx dot(const Spinor4 &a, const Spinor4 &b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2] +
         std::conj(a[3]) * b[3];
}

inline double norm_sq(const Spinor4 &a) {
  return std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
}

// ---------------------------------------------------------------------------
// Dirac representation, 1+1 dimensions (gamma^2, gamma^3 unused)

struct GammaSet {
  Mat4 gamma0;
  Mat4 gamma1;
  /// diag(1,1,0,0): projector on the upper (particle) components.
  Mat4 upper;

  static GammaSet dirac() {
    GammaSet g{};
    g.gamma0[0][0] = 1.0;
    g.gamma0[1][1] = 1.0;
    g.gamma0[2][2] = -1.0;
    g.gamma0[3][3] = -1.0;
    // gamma1 = [[0, sigma_x], [-sigma_x, 0]]
    g.gamma1[0][3] = 1.0;
    g.gamma1[1][2] = 1.0;
    g.gamma1[2][1] = -1.0;
    g.gamma1[3][0] = -1.0;
    g.upper[0][0] = 1.0;
    g.upper[1][1] = 1.0;
    return g;
  }

  /// gamma0 gamma1 (the 1+1 Dirac alpha matrix); couples 1<->4 and 2<->3.
  Mat4 alpha() const { return gamma0 * gamma1; }
};

// ---------------------------------------------------------------------------
// Lorentz boosts

inline void require_subluminal(double v) {
  if (!(std::abs(v) < 1.0))
    throw Error(ErrorCode::InvalidVelocity, "velocity must satisfy |v| < 1, got " + std::to_string(v));
}

inline double lorentz_gamma(double v) {
  require_subluminal(v);
  return 1.0 / std::sqrt(1.0 - v * v);
}

/// Boost acting on (t, x): gamma * [[1, v], [v, 1]].
inline Mat2 boost_matrix(double v) {
  const double g = lorentz_gamma(v);
  return Mat2{{{g, g * v}, {g * v, g}}};
}

inline TwoVector apply(const Mat2 &m, TwoVector p) {
  return {m[0][0] * p.t + m[0][1] * p.x, m[1][0] * p.t + m[1][1] * p.x};
}

/// Spinor representation S of boost_matrix(v), satisfying
/// S gamma^mu S^-1 = (Lambda^-1)^mu_nu gamma^nu.
/// S = cosh(w/2) + sinh(w/2) gamma0 gamma1 with rapidity w = atanh(v).
inline Mat4 spinor_boost(double v) {
  require_subluminal(v);
  const double half = 0.5 * std::atanh(v);
  const Mat4 a = GammaSet::dirac().alpha();
  return cplx{std::cosh(half)} * identity4() + cplx{std::sinh(half)} * a;
}

// ---------------------------------------------------------------------------
// Lattice fields

/// Values of a state on a uniform grid x_i = x_min + i dx (one plane of constant time).
struct PlaneState {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<Spinor4> values;

  PlaneState() = default;
  PlaneState(double x_min_, double dx_, std::size_t n) : x_min(x_min_), dx(dx_), values(n) {
    if (!(dx > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "grid must be non-empty");
  }

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  double x_max() const { return x(size() - 1); }

  bool same_grid(const PlaneState &o) const {
    return size() == o.size() && std::abs(dx - o.dx) <= 1e-12 * dx &&
           std::abs(x_min - o.x_min) <= 1e-9 * std::max(1.0, std::abs(x_min));
  }
};

/// Grid covering [lo, hi] with spacing dx (hi rounded to a whole number of cells).
inline PlaneState make_grid(double lo, double hi, double dx) {
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "empty grid interval");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / dx)) + 1;
  return PlaneState(lo, dx, n);
}

/// Midpoint-rule scalar product on a plane of constant time.
inline cplx inner_product(const PlaneState &a, const PlaneState &b) {
  if (!a.same_grid(b)) throw Error(ErrorCode::GridMismatch, "inner_product: grids differ");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a.values[i], b.values[i]);
  return s * a.dx;
}

inline double norm_sq(const PlaneState &a) {
  double s = 0.0;
  for (const auto &v : a.values) s += norm_sq(v);
  return s * a.dx;
}

inline PlaneState scaled(PlaneState a, cplx s) {
  for (auto &v : a.values)
    for (auto &c : v) c *= s;
  return a;
}

inline PlaneState axpy(cplx alpha, const PlaneState &x, PlaneState y) {
  if (!x.same_grid(y)) throw Error(ErrorCode::GridMismatch, "axpy: grids differ");
  for (std::size_t i = 0; i < y.size(); ++i)
    for (int c = 0; c < 4; ++c) y.values[i][c] += alpha * x.values[i][c];
  return y;
}

/// Relative L2 distance ||a - b|| / ||b||.
inline double relative_l2(const PlaneState &a, const PlaneState &b) {
  if (!a.same_grid(b)) throw Error(ErrorCode::GridMismatch, "relative_l2: grids differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 4; ++c) {
      num += std::norm(a.values[i][c] - b.values[i][c]);
      den += std::norm(b.values[i][c]);
    }
  }
  return std::sqrt(num / den);
}

}  // namespace rtoa
