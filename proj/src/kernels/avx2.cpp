#include <immintrin.h>

#include <cmath>

#include "kernel_table.hpp"

namespace vortexlab::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 16 <= n; k += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 8), _mm256_loadu_pd(b + k + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 12), _mm256_loadu_pd(b + k + 12), s3);
  }
  for (; k + 4 <= n; k += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), s0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + k));
    s1 = _mm256_add_pd(s1, _mm256_loadu_pd(a + k + 4));
  }
  for (; k + 4 <= n; k += 4) s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + k));
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; k < n; ++k) s += a[k];
  return s;
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
    s0 = _mm256_add_pd(s0, _mm256_andnot_pd(sign, d0));
    s1 = _mm256_add_pd(s1, _mm256_andnot_pd(sign, d1));
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    s0 = _mm256_add_pd(s0, _mm256_andnot_pd(sign, d0));
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; k < n; ++k) s += std::fabs(a[k] - b[k]);
  return s;
}

// Elementwise kernels use separate multiply and add so results match the
// scalar reference bit for bit.
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + k), _mm256_mul_pd(va, _mm256_loadu_pd(x + k)));
    _mm256_storeu_pd(y + k, r);
  }
  for (; k < n; ++k) y[k] = y[k] + alpha * x[k];
}

void xpay_avx2(const double* x, double alpha, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(x + k), _mm256_mul_pd(va, _mm256_loadu_pd(y + k)));
    _mm256_storeu_pd(y + k, r);
  }
  for (; k < n; ++k) y[k] = x[k] + alpha * y[k];
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  }
  for (; k < n; ++k) out[k] = a[k] * b[k];
}

void apply_stencil_avx2(const StencilView& op, const double* in, double* out) {
  const int nx = op.nx, ny = op.ny;
  for (int i = 0; i < nx; ++i) {
    out[i] = 0.0;
    out[(ny - 1) * nx + i] = 0.0;
  }
  const __m256d inv_h2 = _mm256_set1_pd(op.inv_h2);
  for (int j = 1; j < ny - 1; ++j) {
    out[j * nx] = 0.0;
    out[j * nx + nx - 1] = 0.0;
    int i = 1;
    for (; i + 4 <= nx - 1; i += 4) {
      const int g = j * nx + i;
      const __m256d w = _mm256_loadu_pd(in + g - 1);
      const __m256d e = _mm256_loadu_pd(in + g + 1);
      const __m256d s = _mm256_loadu_pd(in + g - nx);
      const __m256d n = _mm256_loadu_pd(in + g + nx);
      const __m256d nb = _mm256_add_pd(_mm256_add_pd(w, e), _mm256_add_pd(s, n));
      const __m256d c = _mm256_mul_pd(_mm256_loadu_pd(op.diag + g), _mm256_loadu_pd(in + g));
      const __m256d r = _mm256_mul_pd(_mm256_loadu_pd(op.mask + g), _mm256_mul_pd(_mm256_sub_pd(c, nb), inv_h2));
      _mm256_storeu_pd(out + g, r);
    }
    for (; i < nx - 1; ++i) {
      const int g = j * nx + i;
      out[g] = stencil_point(op, in, g);
    }
  }
}

struct Grid4 {
  __m256d nx_d, nx2, ny2, zero, one, xmax, ymax;
  int nx, ny;
};

inline __m128i to_index(__m256d v) { return _mm256_cvtpd_epi32(v); }

inline __m256d bilinear4(const double* f, const Grid4& gr, __m256d x, __m256d y) {
  const __m256d i0 = _mm256_min_pd(_mm256_max_pd(_mm256_floor_pd(x), gr.zero), gr.nx2);
  const __m256d j0 = _mm256_min_pd(_mm256_max_pd(_mm256_floor_pd(y), gr.zero), gr.ny2);
  const __m256d tx = _mm256_sub_pd(x, i0);
  const __m256d ty = _mm256_sub_pd(y, j0);
  const __m128i g = to_index(_mm256_add_pd(_mm256_mul_pd(j0, gr.nx_d), i0));
  const __m128i one = _mm_set1_epi32(1);
  const __m128i row = _mm_set1_epi32(gr.nx);
  const __m256d a = _mm256_i32gather_pd(f, g, 8);
  const __m256d b = _mm256_i32gather_pd(f, _mm_add_epi32(g, one), 8);
  const __m256d c = _mm256_i32gather_pd(f, _mm_add_epi32(g, row), 8);
  const __m256d d = _mm256_i32gather_pd(f, _mm_add_epi32(_mm_add_epi32(g, row), one), 8);
  const __m256d sx = _mm256_sub_pd(gr.one, tx);
  const __m256d sy = _mm256_sub_pd(gr.one, ty);
  const __m256d lo = _mm256_add_pd(_mm256_mul_pd(sx, a), _mm256_mul_pd(tx, b));
  const __m256d hi = _mm256_add_pd(_mm256_mul_pd(sx, c), _mm256_mul_pd(tx, d));
  return _mm256_add_pd(_mm256_mul_pd(sy, lo), _mm256_mul_pd(ty, hi));
}

inline void catmull_rom4(__m256d t, __m256d w[4]) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d five = _mm256_set1_pd(5.0);
  const __m256d t2 = _mm256_mul_pd(t, t);
  const __m256d t3 = _mm256_mul_pd(t2, t);
  w[0] = _mm256_mul_pd(half, _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(two, t2), t3), t));
  w[1] = _mm256_mul_pd(half, _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(three, t3), _mm256_mul_pd(five, t2)), two));
  w[2] = _mm256_mul_pd(half, _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(four, t2), _mm256_mul_pd(three, t3)), t));
  w[3] = _mm256_mul_pd(half, _mm256_sub_pd(t3, t2));
}

inline __m256d cubic_clamped4(const double* f, const Grid4& gr, __m256d x, __m256d y) {
  const __m256d i0 = _mm256_min_pd(_mm256_max_pd(_mm256_floor_pd(x), gr.zero), gr.nx2);
  const __m256d j0 = _mm256_min_pd(_mm256_max_pd(_mm256_floor_pd(y), gr.zero), gr.ny2);
  __m256d wx[4], wy[4];
  catmull_rom4(_mm256_sub_pd(x, i0), wx);
  catmull_rom4(_mm256_sub_pd(y, j0), wy);
  const __m256d xlast = _mm256_add_pd(gr.nx2, gr.one);
  const __m256d ylast = _mm256_add_pd(gr.ny2, gr.one);
  __m256d cols[4];
  for (int a = 0; a < 4; ++a) {
    const __m256d ii = _mm256_add_pd(i0, _mm256_set1_pd(a - 1.0));
    cols[a] = _mm256_min_pd(_mm256_max_pd(ii, gr.zero), xlast);
  }
  __m256d acc = gr.zero;
  for (int b = 0; b < 4; ++b) {
    const __m256d jj = _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(j0, _mm256_set1_pd(b - 1.0)), gr.zero), ylast);
    const __m256d base = _mm256_mul_pd(jj, gr.nx_d);
    __m256d row = gr.zero;
    for (int a = 0; a < 4; ++a) {
      const __m256d val = _mm256_i32gather_pd(f, to_index(_mm256_add_pd(base, cols[a])), 8);
      row = _mm256_add_pd(row, _mm256_mul_pd(wx[a], val));
    }
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wy[b], row));
  }
  const __m128i g = to_index(_mm256_add_pd(_mm256_mul_pd(j0, gr.nx_d), i0));
  const __m128i one = _mm_set1_epi32(1);
  const __m128i rowstep = _mm_set1_epi32(gr.nx);
  const __m256d a = _mm256_i32gather_pd(f, g, 8);
  const __m256d b = _mm256_i32gather_pd(f, _mm_add_epi32(g, one), 8);
  const __m256d c = _mm256_i32gather_pd(f, _mm_add_epi32(g, rowstep), 8);
  const __m256d d = _mm256_i32gather_pd(f, _mm_add_epi32(_mm_add_epi32(g, rowstep), one), 8);
  const __m256d lo = _mm256_min_pd(_mm256_min_pd(a, b), _mm256_min_pd(c, d));
  const __m256d hi = _mm256_max_pd(_mm256_max_pd(a, b), _mm256_max_pd(c, d));
  return _mm256_min_pd(_mm256_max_pd(acc, lo), hi);
}

void advect_avx2(const AdvectionView& v, double* out) {
  Grid4 gr;
  gr.nx = v.nx;
  gr.ny = v.ny;
  gr.nx_d = _mm256_set1_pd(static_cast<double>(v.nx));
  gr.nx2 = _mm256_set1_pd(static_cast<double>(v.nx - 2));
  gr.ny2 = _mm256_set1_pd(static_cast<double>(v.ny - 2));
  gr.zero = _mm256_setzero_pd();
  gr.one = _mm256_set1_pd(1.0);
  gr.xmax = _mm256_set1_pd(static_cast<double>(v.nx - 1));
  gr.ymax = _mm256_set1_pd(static_cast<double>(v.ny - 1));
  const __m256d dt = _mm256_set1_pd(v.dt);
  const __m256d point5 = _mm256_set1_pd(0.5);

  std::size_t k = 0;
  for (; k + 4 <= v.count; k += 4) {
    const __m128i g = _mm_loadu_si128(reinterpret_cast<const __m128i*>(v.cells + k));
    const __m256d gd = _mm256_cvtepi32_pd(g);
    const __m256d fj = _mm256_floor_pd(_mm256_div_pd(gd, gr.nx_d));
    const __m256d fi = _mm256_sub_pd(gd, _mm256_mul_pd(fj, gr.nx_d));
    const __m256d u0 = _mm256_i32gather_pd(v.u, g, 8);
    const __m256d v0 = _mm256_i32gather_pd(v.v, g, 8);
    __m256d xb = _mm256_sub_pd(fi, _mm256_mul_pd(dt, u0));
    __m256d yb = _mm256_sub_pd(fj, _mm256_mul_pd(dt, v0));
    for (int it = 0; it < v.backtrack_iterations; ++it) {
      __m256d xm = _mm256_mul_pd(_mm256_add_pd(fi, xb), point5);
      __m256d ym = _mm256_mul_pd(_mm256_add_pd(fj, yb), point5);
      xm = _mm256_min_pd(_mm256_max_pd(xm, gr.zero), gr.xmax);
      ym = _mm256_min_pd(_mm256_max_pd(ym, gr.zero), gr.ymax);
      xb = _mm256_sub_pd(fi, _mm256_mul_pd(dt, bilinear4(v.u, gr, xm, ym)));
      yb = _mm256_sub_pd(fj, _mm256_mul_pd(dt, bilinear4(v.v, gr, xm, ym)));
    }
    xb = _mm256_min_pd(_mm256_max_pd(xb, gr.zero), gr.xmax);
    yb = _mm256_min_pd(_mm256_max_pd(yb, gr.zero), gr.ymax);
    const __m256d ic = _mm256_floor_pd(_mm256_add_pd(xb, point5));
    const __m256d jc = _mm256_floor_pd(_mm256_add_pd(yb, point5));
    const __m128i gc = to_index(_mm256_add_pd(_mm256_mul_pd(jc, gr.nx_d), ic));
    const __m128i target = _mm_i32gather_epi32(v.nearest, gc, 4);
    const __m128i moved = _mm_xor_si128(_mm_cmpeq_epi32(target, gc), _mm_set1_epi32(-1));
    if (!_mm_testz_si128(moved, moved)) {
      const __m256d td = _mm256_cvtepi32_pd(target);
      const __m256d tj = _mm256_floor_pd(_mm256_div_pd(td, gr.nx_d));
      const __m256d ti = _mm256_sub_pd(td, _mm256_mul_pd(tj, gr.nx_d));
      const __m256d m = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(moved));
      xb = _mm256_blendv_pd(xb, ti, m);
      yb = _mm256_blendv_pd(yb, tj, m);
    }
    const __m256d r = v.interp == Interpolation::Bilinear ? bilinear4(v.omega, gr, xb, yb)
                                                          : cubic_clamped4(v.omega, gr, xb, yb);
    _mm256_storeu_pd(out + k, r);
  }
  for (; k < v.count; ++k) out[k] = advect_point(v, v.cells[k]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{dot_avx2,      sum_avx2,           abs_diff_sum_avx2,
                                 axpy_avx2,     xpay_avx2,          multiply_avx2,
                                 apply_stencil_avx2, advect_avx2};
  return table;
}

}  // namespace vortexlab::kernels::detail
