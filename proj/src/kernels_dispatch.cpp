// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <cstring>

#include "ironstream/kernels.hpp"

namespace ironstream::kernels {

namespace detail {
#if defined(IRONSTREAM_HAVE_AVX2)
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(IRONSTREAM_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return avx2_ops_impl();
#endif
  return nullptr;
}
}  // namespace detail

namespace {

struct Dispatch {
  const Ops* ops;
  Backend backend;

  Dispatch() {
    ops = detail::scalar_ops();
    backend = Backend::scalar;
    const Ops* avx2 = detail::avx2_ops();
    const char* env = std::getenv("IRONSTREAM_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return;
    if (env && std::strcmp(env, "avx2") == 0) {
      if (avx2) {
        ops = avx2;
        backend = Backend::avx2;
      }
      return;
    }
    // auto
    if (avx2) {
      ops = avx2;
      backend = Backend::avx2;
    }
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name() {
  return dispatch().backend == Backend::avx2 ? "avx2" : "scalar";
}

bool force_backend(Backend b) {
  if (b == Backend::scalar) {
    dispatch().ops = detail::scalar_ops();
    dispatch().backend = Backend::scalar;
    return true;
  }
  const Ops* avx2 = detail::avx2_ops();
  if (!avx2) return false;
  dispatch().ops = avx2;
  dispatch().backend = Backend::avx2;
  return true;
}

double sum(const double* x, std::size_t n) { return dispatch().ops->sum(x, n); }
double dot(const double* a, const double* b, std::size_t n) { return dispatch().ops->dot(a, b, n); }
double sum_squares(const double* x, std::size_t n) { return dispatch().ops->sum_squares(x, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { dispatch().ops->axpy(a, x, y, n); }
void scale(double a, double* x, std::size_t n) { dispatch().ops->scale(a, x, n); }
void mul(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().ops->mul(a, b, out, n);
}
void add(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().ops->add(a, b, out, n);
}
void affine(double a, const double* x, double b, double* out, std::size_t n) {
  dispatch().ops->affine(a, x, b, out, n);
}
void convert_codes(const double* volts, std::int32_t* codes, std::uint8_t* saturated,
                   std::size_t n, double gain, double vref) {
  dispatch().ops->convert_codes(volts, codes, saturated, n, gain, vref);
}
void decode_codes(const std::int32_t* codes, double* volts, std::size_t n, double gain,
                  double vref) {
  dispatch().ops->decode_codes(codes, volts, n, gain, vref);
}

}  // namespace ironstream::kernels
