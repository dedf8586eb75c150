#pragma once

// Data-parallel inner loops of the propagators. Each kernel has a scalar
// reference implementation and an AVX2/FMA variant; the variant is chosen
// once at startup from CPUID and can be overridden for testing or with
// DICKE_SIMD=scalar in the environment.

#include <cstddef>
#include <string_view>

namespace dicke::kernels {

inline constexpr int kMaxBands = 8;

/// Diagonal-layout band matrix over padded vectors. For every band b and row i
/// in [0, n), x[i + offsets[b]] must be readable (zero padding on both sides).
struct BandView {
  std::size_t n = 0;
  const double* diag = nullptr;  // length n, never scaled by lambda
  int n_bands = 0;               // off-diagonal bands, all scaled by lambda
  const double* bands[kMaxBands] = {};
  std::ptrdiff_t offsets[kMaxBands] = {};
};

/// y = scale * ((diag + lambda * bands - shift) x) + beta * z, applied to a real vector.
/// z may be null when beta == 0. y must not alias x.
using BandApplyFn = void (*)(const BandView& op, double lambda, double shift, double scale,
                             const double* x, double beta, const double* z, double* y);

/// out += (ar + i ai) * (wr + i wi), real/imaginary parts stored in separate arrays.
using ComplexAxpyFn = void (*)(std::size_t n, double ar, double ai, const double* wr,
                               const double* wi, double* outr, double* outi);

/// y = a * x + b * y
using AxpbyFn = void (*)(std::size_t n, double a, const double* x, double b, double* y);

/// sum_i x[i]^2
using SumSquaresFn = double (*)(std::size_t n, const double* x);

struct KernelTable {
  const char* name;
  BandApplyFn band_apply;
  ComplexAxpyFn complex_axpy;
  AxpbyFn axpby;
  SumSquaresFn sum_squares;
};

enum class Backend { scalar, avx2 };

const KernelTable& scalar_table();
/// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();
bool cpu_supports_avx2();

/// Currently selected table.
const KernelTable& active();
/// Selects a backend; returns false (and keeps the current one) if unavailable.
bool select(Backend backend);
Backend active_backend();
std::string_view backend_name(Backend backend);

}  // namespace dicke::kernels
