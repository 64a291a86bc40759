// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernels. This translation unit is the only one compiled with -mavx2;
// it must not be entered unless the CPU reports AVX2 (the dispatcher checks).
//
// Elementwise kernels use plain mul/add (no FMA) so results stay bit-identical
// to the scalar reference. Reductions accumulate in four lanes and differ from
// the scalar left-to-right sum only by reassociation.

#include <immintrin.h>

#include <cmath>

#include "ironstream/kernels.hpp"

namespace ironstream::kernels {
namespace {

constexpr double kFullScale = 8388607.0;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double v_sum_squares(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void v_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void v_add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void v_affine(double a, const double* x, double b, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), vb));
  for (; i < n; ++i) out[i] = a * x[i] + b;
}

void v_convert(const double* volts, std::int32_t* codes, std::uint8_t* saturated, std::size_t n,
               double gain, double vref) {
  const double k = gain * kFullScale / vref;
  const __m256d vk = _mm256_set1_pd(k);
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vmax = _mm256_set1_pd(8388607.0);
  const __m256d vmin = _mm256_set1_pd(-8388608.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d c = _mm256_floor_pd(_mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(volts + i), vk), vhalf));
    __m256d over = _mm256_cmp_pd(c, vmax, _CMP_GT_OQ);
    __m256d under = _mm256_cmp_pd(c, vmin, _CMP_LT_OQ);
    c = _mm256_min_pd(_mm256_max_pd(c, vmin), vmax);
    __m128i q = _mm256_cvttpd_epi32(c);
    alignas(16) std::int32_t out4[4];
    _mm_store_si128(reinterpret_cast<__m128i*>(out4), q);
    codes[i] = out4[0];
    codes[i + 1] = out4[1];
    codes[i + 2] = out4[2];
    codes[i + 3] = out4[3];
    if (saturated) {
      const int mask = _mm256_movemask_pd(_mm256_or_pd(over, under));
      saturated[i] = static_cast<std::uint8_t>(mask & 1);
      saturated[i + 1] = static_cast<std::uint8_t>((mask >> 1) & 1);
      saturated[i + 2] = static_cast<std::uint8_t>((mask >> 2) & 1);
      saturated[i + 3] = static_cast<std::uint8_t>((mask >> 3) & 1);
    }
  }
  for (; i < n; ++i) {
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

void v_decode(const std::int32_t* codes, double* volts, std::size_t n, double gain, double vref) {
  const double k = vref / (gain * kFullScale);
  const __m256d vk = _mm256_set1_pd(k);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i q = _mm_loadu_si128(reinterpret_cast<const __m128i*>(codes + i));
    _mm256_storeu_pd(volts + i, _mm256_mul_pd(_mm256_cvtepi32_pd(q), vk));
  }
  for (; i < n; ++i) volts[i] = static_cast<double>(codes[i]) * k;
}

const Ops kAvx2Ops = {
    v_sum, v_dot, v_sum_squares, v_axpy, v_scale, v_mul, v_add, v_affine, v_convert, v_decode,
};

}  // namespace

namespace detail {
const Ops* avx2_ops_impl() { return &kAvx2Ops; }
}  // namespace detail

}  // namespace ironstream::kernels
