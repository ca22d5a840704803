#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, where the build and the CPU allow it, an AVX2 variant.
// The variant is chosen once at startup (override with VORTEXLAB_ISA=scalar)
// and can be switched at runtime for equivalence testing.

#include <cstddef>
#include <span>

namespace vortexlab::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa();
bool isa_available(Isa isa);
// Throws InputError if the ISA is not available on this build/CPU.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

// Restores the previously active ISA on scope exit.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : saved_(active_isa()) { set_isa(isa); }
  ~ScopedIsa() { set_isa(saved_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa saved_;
};

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y = x + alpha * y
void xpay(std::span<const double> x, double alpha, std::span<double> y);
// out = a * b
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

// Five-point operator on a dense nx*ny grid whose outer ring is outside the
// domain: out = mask * (diag * p - (pW + pE + pS + pN)) * inv_h2. The ring
// is written as zero.
struct StencilView {
  int nx = 0;
  int ny = 0;
  double inv_h2 = 1.0;
  const double* diag = nullptr;
  const double* mask = nullptr;
};
void apply_stencil(const StencilView& op, std::span<const double> in, std::span<double> out);

enum class Interpolation { Bilinear, CubicClamped };

// Semi-Lagrangian gather. Coordinates are in cell units (cell (i, j) has its
// center at (i, j)). For each listed cell x the foot point y solves the
// midpoint relation y = x - dt u((x + y) / 2) by fixed-point iteration from
// y = x - dt u(x), with u interpolated bilinearly; one iteration is the
// explicit midpoint rule, and iterating to convergence gives the implicit
// (area-preserving) one. The foot is clamped onto the grid, replaced by the
// nearest domain-cell center when it falls outside the domain, and omega is
// sampled there.
struct AdvectionView {
  int nx = 0;
  int ny = 0;
  const double* omega = nullptr;  // dense grid, zero outside the domain
  const double* u = nullptr;      // dense grid velocity, cell units per time
  const double* v = nullptr;
  const int* nearest = nullptr;   // grid index of the nearest domain cell
  const int* cells = nullptr;     // grid indices of the target cells
  std::size_t count = 0;
  double dt = 0.0;
  Interpolation interp = Interpolation::Bilinear;
  int backtrack_iterations = 1;
};
void advect(const AdvectionView& view, std::span<double> out);

}  // namespace vortexlab::kernels
