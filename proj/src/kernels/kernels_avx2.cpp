// Compiled with -mavx2 -mfma. Only reached after a CPUID check.

#include "dicke/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace dicke::kernels {
namespace {

void band_apply_avx2(const BandView& op, double lambda, double shift, double scale,
                     const double* x, double beta, const double* z, double* y) {
  const std::size_t n = op.n;
  const __m256d vlam = _mm256_set1_pd(lambda);
  const __m256d vshift = _mm256_set1_pd(shift);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vbeta = _mm256_set1_pd(beta);
  const bool use_z = beta != 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    __m256d acc = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(op.diag + i), vshift), xv);
    __m256d off = _mm256_setzero_pd();
    for (int b = 0; b < op.n_bands; ++b) {
      const double* xs = x + static_cast<std::ptrdiff_t>(i) + op.offsets[b];
      off = _mm256_fmadd_pd(_mm256_loadu_pd(op.bands[b] + i), _mm256_loadu_pd(xs), off);
    }
    acc = _mm256_fmadd_pd(vlam, off, acc);
    __m256d out = _mm256_mul_pd(vscale, acc);
    if (use_z) out = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(z + i), out);
    _mm256_storeu_pd(y + i, out);
  }
  for (; i < n; ++i) {
    double acc = (op.diag[i] - shift) * x[i];
    double off = 0.0;
    for (int b = 0; b < op.n_bands; ++b) {
      off += op.bands[b][i] * x[static_cast<std::ptrdiff_t>(i) + op.offsets[b]];
    }
    acc += lambda * off;
    y[i] = use_z ? scale * acc + beta * z[i] : scale * acc;
  }
}

void complex_axpy_avx2(std::size_t n, double ar, double ai, const double* wr, const double* wi,
                       double* outr, double* outi) {
  const __m256d var = _mm256_set1_pd(ar);
  const __m256d vai = _mm256_set1_pd(ai);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(wr + i);
    const __m256d im = _mm256_loadu_pd(wi + i);
    __m256d o_r = _mm256_loadu_pd(outr + i);
    __m256d o_i = _mm256_loadu_pd(outi + i);
    o_r = _mm256_fmadd_pd(var, r, o_r);
    o_r = _mm256_fnmadd_pd(vai, im, o_r);
    o_i = _mm256_fmadd_pd(var, im, o_i);
    o_i = _mm256_fmadd_pd(vai, r, o_i);
    _mm256_storeu_pd(outr + i, o_r);
    _mm256_storeu_pd(outi + i, o_i);
  }
  for (; i < n; ++i) {
    outr[i] += ar * wr[i] - ai * wi[i];
    outi[i] += ar * wi[i] + ai * wr[i];
  }
}

void axpby_avx2(std::size_t n, double a, const double* x, double b, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), yv));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double sum_squares_avx2(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", band_apply_avx2, complex_axpy_avx2, axpby_avx2,
                                 sum_squares_avx2};
  return &table;
}

}  // namespace dicke::kernels

#else

namespace dicke::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace dicke::kernels

#endif
