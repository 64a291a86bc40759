// SPDX-License-Identifier: Apache-2.0
//
// Scalar reference kernels. These define the semantics the SIMD variants
// must reproduce; keep them obvious.

#include <cmath>

#include "ironstream/kernels.hpp"

namespace ironstream::kernels {
namespace {

constexpr double kFullScale = 8388607.0;  // 2^23 - 1

double s_sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double s_sum_squares(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void s_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void s_affine(double a, const double* x, double b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b;
}

void s_convert(const double* volts, std::int32_t* codes, std::uint8_t* saturated, std::size_t n,
               double gain, double vref) {
  const double k = gain * kFullScale / vref;
  for (std::size_t i = 0; i < n; ++i) {
    double c = std::floor(volts[i] * k + 0.5);
    std::uint8_t sat = 0;
    if (c > 8388607.0) {
      c = 8388607.0;
      sat = 1;
    } else if (c < -8388608.0) {
      c = -8388608.0;
      sat = 1;
    }
    codes[i] = static_cast<std::int32_t>(c);
    if (saturated) saturated[i] = sat;
  }
}

void s_decode(const std::int32_t* codes, double* volts, std::size_t n, double gain, double vref) {
  const double k = vref / (gain * kFullScale);
  for (std::size_t i = 0; i < n; ++i) volts[i] = static_cast<double>(codes[i]) * k;
}

const Ops kScalarOps = {
    s_sum, s_dot, s_sum_squares, s_axpy, s_scale, s_mul, s_add, s_affine, s_convert, s_decode,
};

}  // namespace

namespace detail {
const Ops* scalar_ops() { return &kScalarOps; }
}  // namespace detail

}  // namespace ironstream::kernels
