#include "dicke/kernels.hpp"

namespace dicke::kernels {
namespace {

void band_apply_scalar(const BandView& op, double lambda, double shift, double scale,
                       const double* x, double beta, const double* z, double* y) {
  const std::size_t n = op.n;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = (op.diag[i] - shift) * x[i];
    double off = 0.0;
    for (int b = 0; b < op.n_bands; ++b) {
      off += op.bands[b][i] * x[static_cast<std::ptrdiff_t>(i) + op.offsets[b]];
    }
    acc += lambda * off;
    y[i] = beta != 0.0 ? scale * acc + beta * z[i] : scale * acc;
  }
}

void complex_axpy_scalar(std::size_t n, double ar, double ai, const double* wr, const double* wi,
                         double* outr, double* outi) {
  for (std::size_t i = 0; i < n; ++i) {
    outr[i] += ar * wr[i] - ai * wi[i];
    outi[i] += ar * wi[i] + ai * wr[i];
  }
}

void axpby_scalar(std::size_t n, double a, const double* x, double b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double sum_squares_scalar(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", band_apply_scalar, complex_axpy_scalar, axpby_scalar,
                                 sum_squares_scalar};
  return table;
}

}  // namespace dicke::kernels
