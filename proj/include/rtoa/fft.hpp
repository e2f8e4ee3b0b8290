#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>

#include "rtoa/core.hpp"

namespace rtoa {

namespace detail {
// FFTW planning is not thread-safe; execution is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// In-place strided 1D complex FFT over one spinor component of a lattice of Spinor4.
/// Unnormalized in both directions.
class SpinorFft {
 public:
  explicit SpinorFft(std::size_t n) : n_(n) {
    std::vector<Spinor4> scratch(n);
    auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
    const int len = static_cast<int>(n);
    std::lock_guard lock(detail::fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_many_dft(1, &len, 1, buf, nullptr, 4, 1, buf, nullptr, 4, 1,
                                  FFTW_FORWARD, flags);
    backward_ = fftw_plan_many_dft(1, &len, 1, buf, nullptr, 4, 1, buf, nullptr, 4, 1,
                                   FFTW_BACKWARD, flags);
    if (forward_ == nullptr || backward_ == nullptr) throw Error(ErrorCode::InvalidArgument, "FFTW planning failed");
  }

  SpinorFft(const SpinorFft &) = delete;
  SpinorFft &operator=(const SpinorFft &) = delete;

  ~SpinorFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<Spinor4> &v, int component) const { run(forward_, v, component); }
  void backward(std::vector<Spinor4> &v, int component) const { run(backward_, v, component); }

 private:
  void run(fftw_plan plan, std::vector<Spinor4> &v, int component) const {
    if (v.size() != n_) throw Error(ErrorCode::GridMismatch, "SpinorFft: size mismatch");
    auto *p = reinterpret_cast<fftw_complex *>(reinterpret_cast<cplx *>(v.data()) + component);
    fftw_execute_dft(plan, p, p);
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Angular wavenumber of FFT bin j for n samples spaced dx.
inline double fft_wavenumber(std::size_t j, std::size_t n, double dx) {
  const auto sj = static_cast<double>(j <= n / 2 ? static_cast<long long>(j)
                                                 : static_cast<long long>(j) - static_cast<long long>(n));
  return 2.0 * std::numbers::pi * sj / (static_cast<double>(n) * dx);
}

}  // namespace rtoa
