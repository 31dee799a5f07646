#pragma once

// Thin RAII layer over FFTW3 3-D transforms on m^3 cubes. Plans are created
// once per (size, kind) with FFTW_ESTIMATE so repeated runs pick the same
// algorithm and reproduce results bit for bit.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "holderlab/grid.hpp"

namespace holderlab::fft {

enum class Kind { r2c, c2r, c2c_forward, c2c_backward };

namespace detail {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct BufferDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

inline fftw_plan make_plan(int m, Kind kind) {
  const std::size_t nreal = static_cast<std::size_t>(m) * m * m;
  const std::size_t nhalf = static_cast<std::size_t>(m) * m * (m / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  switch (kind) {
    case Kind::r2c: {
      std::unique_ptr<void, BufferDeleter> in(fftw_malloc(sizeof(double) * nreal));
      std::unique_ptr<void, BufferDeleter> out(fftw_malloc(sizeof(fftw_complex) * nhalf));
      return fftw_plan_dft_r2c_3d(m, m, m, static_cast<double*>(in.get()),
                                  static_cast<fftw_complex*>(out.get()), flags);
    }
    case Kind::c2r: {
      std::unique_ptr<void, BufferDeleter> in(fftw_malloc(sizeof(fftw_complex) * nhalf));
      std::unique_ptr<void, BufferDeleter> out(fftw_malloc(sizeof(double) * nreal));
      return fftw_plan_dft_c2r_3d(m, m, m, static_cast<fftw_complex*>(in.get()),
                                  static_cast<double*>(out.get()), flags);
    }
    case Kind::c2c_forward:
    case Kind::c2c_backward: {
      std::unique_ptr<void, BufferDeleter> in(fftw_malloc(sizeof(fftw_complex) * nreal));
      std::unique_ptr<void, BufferDeleter> out(fftw_malloc(sizeof(fftw_complex) * nreal));
      const int sign = kind == Kind::c2c_forward ? FFTW_FORWARD : FFTW_BACKWARD;
      return fftw_plan_dft_3d(m, m, m, static_cast<fftw_complex*>(in.get()),
                              static_cast<fftw_complex*>(out.get()), sign, flags);
    }
  }
  return nullptr;
}

inline fftw_plan plan(int m, Kind kind) {
  static std::mutex mutex;
  static std::map<std::pair<int, Kind>, PlanHandle> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{m, kind}];
  if (!slot) slot.reset(make_plan(m, kind));
  return slot.get();
}

inline fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

inline std::size_t half_size(int m) { return static_cast<std::size_t>(m) * m * (m / 2 + 1); }

/// Unnormalized forward transform of m^3 real samples into the m*m*(m/2+1) half spectrum.
inline void forward_real(int m, double* in, Complex* out) {
  fftw_execute_dft_r2c(detail::plan(m, Kind::r2c), in, detail::as_fftw(out));
}

/// Unnormalized inverse of forward_real. Overwrites `in`.
inline void inverse_real(int m, Complex* in, double* out) {
  fftw_execute_dft_c2r(detail::plan(m, Kind::c2r), detail::as_fftw(in), out);
}

inline void forward_complex(int m, Complex* in, Complex* out) {
  fftw_execute_dft(detail::plan(m, Kind::c2c_forward), detail::as_fftw(in), detail::as_fftw(out));
}

inline void inverse_complex(int m, Complex* in, Complex* out) {
  fftw_execute_dft(detail::plan(m, Kind::c2c_backward), detail::as_fftw(in), detail::as_fftw(out));
}

}  // namespace holderlab::fft
