#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "vortexlab/kernels.hpp"

namespace vortexlab::kernels::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*abs_diff_sum)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*xpay)(const double*, double, double*, std::size_t);
  void (*multiply)(const double*, const double*, double*, std::size_t);
  void (*apply_stencil)(const StencilView&, const double*, double*);
  void (*advect)(const AdvectionView&, double*);
};

const KernelTable& scalar_table();
#if defined(VORTEXLAB_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

// Per-element routines shared by the scalar kernels and the scalar tails of
// the vector kernels, so both paths round identically. Both translation
// units are built with floating-point contraction disabled.

inline double stencil_point(const StencilView& op, const double* p, int g) {
  const double nb = (p[g - 1] + p[g + 1]) + (p[g - op.nx] + p[g + op.nx]);
  return op.mask[g] * ((op.diag[g] * p[g] - nb) * op.inv_h2);
}

inline double bilinear(const double* f, int nx, int ny, double x, double y) {
  int i0 = static_cast<int>(std::floor(x));
  int j0 = static_cast<int>(std::floor(y));
  i0 = std::clamp(i0, 0, nx - 2);
  j0 = std::clamp(j0, 0, ny - 2);
  const double tx = x - i0;
  const double ty = y - j0;
  const int g = j0 * nx + i0;
  const double a = f[g], b = f[g + 1], c = f[g + nx], d = f[g + nx + 1];
  return (1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d);
}

inline void catmull_rom_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = 0.5 * ((2.0 * t2 - t3) - t);
  w[1] = 0.5 * ((3.0 * t3 - 5.0 * t2) + 2.0);
  w[2] = 0.5 * ((4.0 * t2 - 3.0 * t3) + t);
  w[3] = 0.5 * (t3 - t2);
}

// Catmull-Rom bicubic, clamped to the range of the four nearest values so
// the result never leaves the local bounds.
inline double cubic_clamped(const double* f, int nx, int ny, double x, double y) {
  int i0 = static_cast<int>(std::floor(x));
  int j0 = static_cast<int>(std::floor(y));
  i0 = std::clamp(i0, 0, nx - 2);
  j0 = std::clamp(j0, 0, ny - 2);
  const double tx = x - i0;
  const double ty = y - j0;
  double wx[4], wy[4];
  catmull_rom_weights(tx, wx);
  catmull_rom_weights(ty, wy);
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int jj = std::clamp(j0 - 1 + b, 0, ny - 1);
    double row = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int ii = std::clamp(i0 - 1 + a, 0, nx - 1);
      row = row + wx[a] * f[jj * nx + ii];
    }
    acc = acc + wy[b] * row;
  }
  const int g = j0 * nx + i0;
  const double lo = std::min(std::min(f[g], f[g + 1]), std::min(f[g + nx], f[g + nx + 1]));
  const double hi = std::max(std::max(f[g], f[g + 1]), std::max(f[g + nx], f[g + nx + 1]));
  return std::min(std::max(acc, lo), hi);
}

inline double advect_point(const AdvectionView& v, int g) {
  const int nx = v.nx, ny = v.ny;
  const double fi = static_cast<double>(g % nx);
  const double fj = static_cast<double>(g / nx);
  const double xmax = static_cast<double>(nx - 1);
  const double ymax = static_cast<double>(ny - 1);
  double xb = fi - v.dt * v.u[g];
  double yb = fj - v.dt * v.v[g];
  for (int it = 0; it < v.backtrack_iterations; ++it) {
    double xm = (fi + xb) * 0.5;
    double ym = (fj + yb) * 0.5;
    xm = std::min(std::max(xm, 0.0), xmax);
    ym = std::min(std::max(ym, 0.0), ymax);
    xb = fi - v.dt * bilinear(v.u, nx, ny, xm, ym);
    yb = fj - v.dt * bilinear(v.v, nx, ny, xm, ym);
  }
  xb = std::min(std::max(xb, 0.0), xmax);
  yb = std::min(std::max(yb, 0.0), ymax);
  const int ic = static_cast<int>(std::floor(xb + 0.5));
  const int jc = static_cast<int>(std::floor(yb + 0.5));
  const int gc = jc * nx + ic;
  const int target = v.nearest[gc];
  if (target != gc) {
    xb = static_cast<double>(target % nx);
    yb = static_cast<double>(target / nx);
  }
  return v.interp == Interpolation::Bilinear ? bilinear(v.omega, nx, ny, xb, yb)
                                             : cubic_clamped(v.omega, nx, ny, xb, yb);
}

}  // namespace vortexlab::kernels::detail
