#include <cmath>

#include "kernel_table.hpp"

namespace vortexlab::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k];
  return s;
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::fabs(a[k] - b[k]);
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = y[k] + alpha * x[k];
}

void xpay_scalar(const double* x, double alpha, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + alpha * y[k];
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

void apply_stencil_scalar(const StencilView& op, const double* in, double* out) {
  const int nx = op.nx, ny = op.ny;
  for (int i = 0; i < nx; ++i) {
    out[i] = 0.0;
    out[(ny - 1) * nx + i] = 0.0;
  }
  for (int j = 1; j < ny - 1; ++j) {
    out[j * nx] = 0.0;
    out[j * nx + nx - 1] = 0.0;
    for (int i = 1; i < nx - 1; ++i) {
      const int g = j * nx + i;
      out[g] = stencil_point(op, in, g);
    }
  }
}

void advect_scalar(const AdvectionView& v, double* out) {
  for (std::size_t k = 0; k < v.count; ++k) out[k] = advect_point(v, v.cells[k]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar,      sum_scalar,           abs_diff_sum_scalar,
                                 axpy_scalar,     xpay_scalar,          multiply_scalar,
                                 apply_stencil_scalar, advect_scalar};
  return table;
}

}  // namespace vortexlab::kernels::detail
