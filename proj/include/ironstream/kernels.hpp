// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops used by the synthesizer, the sample codec and
// the DSP stack. Every operation has a scalar reference implementation and,
// where the build and the CPU allow, a SIMD variant selected at runtime.
//
// Contract between backends:
//   - elementwise kernels (axpy, scale, mul, add, affine, convert_codes,
//     decode_codes) are bit-identical across backends;
//   - reduction kernels (sum, dot, sum_squares) may differ by floating-point
//     reassociation only; tests bound the relative difference at 1e-12.
//
// Backend selection: AVX2 when compiled in and reported by the CPU,
// otherwise scalar. The environment variable IRONSTREAM_SIMD=scalar|avx2
// forces a backend at process start; force_backend() does the same from
// code (tests use it).

#include <cstddef>
#include <cstdint>

namespace ironstream::kernels {

enum class Backend { scalar, avx2 };

struct Ops {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  // y[i] += a * x[i]
  void (*axpy)(double, const double*, double*, std::size_t);
  // x[i] *= a
  void (*scale)(double, double*, std::size_t);
  // out[i] = a[i] * b[i]
  void (*mul)(const double*, const double*, double*, std::size_t);
  // out[i] = a[i] + b[i]
  void (*add)(const double*, const double*, double*, std::size_t);
  // out[i] = a * x[i] + b
  void (*affine)(double, const double*, double, double*, std::size_t);
  // codes[i] = clamp(floor(v[i]*gain*(2^23-1)/vref + 0.5), -2^23, 2^23-1),
  // saturated[i] = 1 where the clamp engaged (saturated may be null)
  void (*convert_codes)(const double*, std::int32_t*, std::uint8_t*, std::size_t, double gain,
                        double vref);
  // volts[i] = codes[i] * vref / (gain*(2^23-1))
  void (*decode_codes)(const std::int32_t*, double*, std::size_t, double gain, double vref);
};

Backend active_backend();
const char* backend_name();
/// Returns false (and leaves the backend unchanged) when `b` is unavailable.
bool force_backend(Backend b);

// Dispatched entry points.
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void affine(double a, const double* x, double b, double* out, std::size_t n);
void convert_codes(const double* volts, std::int32_t* codes, std::uint8_t* saturated,
                   std::size_t n, double gain, double vref);
void decode_codes(const std::int32_t* codes, double* volts, std::size_t n, double gain,
                  double vref);

namespace detail {
const Ops* scalar_ops();
/// Null when the build lacks AVX2 support or the CPU does not report it.
const Ops* avx2_ops();
}  // namespace detail

}  // namespace ironstream::kernels
